/** @file
 * File formats shared by the CLI and tests: JSON walk configurations with
 * [re, im] matrix literals, JSON block-state dumps, and CSV distributions.
 */
#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "oqrw/constructors.hpp"
#include "oqrw/walk.hpp"

namespace oqrw {

using nlohmann::json;

// --- matrix literals: nested arrays of [re, im] pairs ---

inline json matrix_to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c)
            row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline ComplexMatrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty())
        throw ParseError("matrix literal: expected a non-empty array of rows");
    const std::size_t rows = j.size();
    if (!j[0].is_array() || j[0].empty())
        throw ParseError("matrix literal: expected non-empty rows");
    const std::size_t cols = j[0].size();
    ComplexMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw ParseError("matrix literal: ragged rows");
        for (std::size_t c = 0; c < cols; ++c) {
            const json& e = j[r][c];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                throw ParseError("matrix literal: entries must be [re, im] pairs");
            m(r, c) = Complex{e[0].get<double>(), e[1].get<double>()};
        }
    }
    if (!all_finite(m)) throw ParseError("matrix literal: non-finite entry");
    return m;
}

// --- walk configuration ---

struct RunSpec {
    std::string mode = "evolve"; // evolve | trajectory | realize | unitary
    std::optional<std::int64_t> steps;
    std::optional<std::int64_t> samples;
    std::optional<std::uint64_t> seed;
};

struct WalkConfig {
    // preset form
    std::optional<std::string> preset;
    std::map<std::string, double> params;
    std::vector<double> angles;

    // explicit form
    std::string kind; // "lattice_z" | "graph"
    std::size_t chirality_dim = 0;
    std::optional<ComplexMatrix> left, right;              // lattice
    std::int64_t vertices = 0;                             // graph
    std::map<std::pair<Vertex, Vertex>, ComplexMatrix> edges; // (target, source)

    std::optional<Vertex> initial_vertex;
    std::optional<ComplexMatrix> initial_block;

    std::optional<RunSpec> run;
};

inline WalkConfig config_from_json(const json& j) {
    WalkConfig cfg;
    if (!j.is_object() || !j.contains("walk"))
        throw ParseError("config: missing 'walk' object");
    const json& w = j.at("walk");
    if (w.contains("preset")) {
        cfg.preset = w.at("preset").get<std::string>();
        if (w.contains("params")) {
            for (const auto& [key, value] : w.at("params").items()) {
                if (key == "angles") {
                    if (!value.is_array()) throw ParseError("config: angles must be an array");
                    for (const auto& a : value) cfg.angles.push_back(a.get<double>());
                } else {
                    cfg.params[key] = value.get<double>();
                }
            }
        }
    } else if (w.contains("kind")) {
        cfg.kind = w.at("kind").get<std::string>();
        if (!w.contains("chirality_dim"))
            throw ParseError("config: walk needs 'chirality_dim'");
        cfg.chirality_dim = w.at("chirality_dim").get<std::size_t>();
        if (cfg.kind == "lattice_z") {
            if (!w.contains("left") || !w.contains("right"))
                throw ParseError("config: lattice walk needs 'left' and 'right' matrices");
            cfg.left = matrix_from_json(w.at("left"));
            cfg.right = matrix_from_json(w.at("right"));
        } else if (cfg.kind == "graph") {
            if (!w.contains("vertices") || !w.contains("edges"))
                throw ParseError("config: graph walk needs 'vertices' and 'edges'");
            cfg.vertices = w.at("vertices").get<std::int64_t>();
            for (const json& e : w.at("edges")) {
                if (!e.contains("source") || !e.contains("target") || !e.contains("matrix"))
                    throw ParseError("config: edge needs source, target, matrix");
                const auto source = e.at("source").get<Vertex>();
                const auto target = e.at("target").get<Vertex>();
                cfg.edges[{target, source}] = matrix_from_json(e.at("matrix"));
            }
        } else {
            throw ParseError("config: unknown walk kind '" + cfg.kind + "'");
        }
    } else {
        throw ParseError("config: walk needs either 'preset' or 'kind'");
    }

    if (j.contains("initial")) {
        const json& ini = j.at("initial");
        if (!ini.contains("vertex") || !ini.contains("block"))
            throw ParseError("config: initial needs 'vertex' and 'block'");
        cfg.initial_vertex = ini.at("vertex").get<Vertex>();
        cfg.initial_block = matrix_from_json(ini.at("block"));
    }

    if (j.contains("run")) {
        RunSpec run;
        const json& r = j.at("run");
        if (r.contains("mode")) run.mode = r.at("mode").get<std::string>();
        if (r.contains("steps")) run.steps = r.at("steps").get<std::int64_t>();
        if (r.contains("samples")) run.samples = r.at("samples").get<std::int64_t>();
        if (r.contains("seed")) run.seed = r.at("seed").get<std::uint64_t>();
        cfg.run = run;
    }
    return cfg;
}

inline WalkConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: invalid JSON: ") + e.what());
    }
    return config_from_json(j);
}

inline json config_to_json(const WalkConfig& cfg) {
    json w;
    if (cfg.preset) {
        w["preset"] = *cfg.preset;
        json p = json::object();
        for (const auto& [k, v] : cfg.params) p[k] = v;
        if (!cfg.angles.empty()) p["angles"] = cfg.angles;
        if (!p.empty()) w["params"] = std::move(p);
    } else {
        w["kind"] = cfg.kind;
        w["chirality_dim"] = cfg.chirality_dim;
        if (cfg.kind == "lattice_z") {
            w["left"] = matrix_to_json(*cfg.left);
            w["right"] = matrix_to_json(*cfg.right);
        } else {
            w["vertices"] = cfg.vertices;
            json edges = json::array();
            for (const auto& [key, m] : cfg.edges) {
                edges.push_back(json{{"source", key.second},
                                     {"target", key.first},
                                     {"matrix", matrix_to_json(m)}});
            }
            w["edges"] = std::move(edges);
        }
    }
    json out{{"walk", std::move(w)}};
    if (cfg.initial_vertex) {
        out["initial"] = json{{"vertex", *cfg.initial_vertex},
                              {"block", matrix_to_json(*cfg.initial_block)}};
    }
    if (cfg.run) {
        json r{{"mode", cfg.run->mode}};
        if (cfg.run->steps) r["steps"] = *cfg.run->steps;
        if (cfg.run->samples) r["samples"] = *cfg.run->samples;
        if (cfg.run->seed) r["seed"] = *cfg.run->seed;
        out["run"] = std::move(r);
    }
    return out;
}

struct BuiltWalk {
    TransitionOperators ops;
    BlockState initial;
};

/// Raw construction, no normalization check: the validate command reports
/// deviations instead of refusing up front.
inline TransitionOperators construct_operators(const WalkConfig& cfg) {
    if (cfg.preset) return make_preset(*cfg.preset, cfg.params, cfg.angles).ops;
    if (cfg.kind == "lattice_z")
        return TransitionOperators::stationary(VertexSpace::lattice_z(0, 0), *cfg.left,
                                               *cfg.right);
    std::map<std::pair<Vertex, Vertex>, ComplexMatrix> edges = cfg.edges;
    return TransitionOperators::graph(VertexSpace::finite_graph(cfg.vertices),
                                      cfg.chirality_dim, std::move(edges));
}

/// Materializes a configuration: constructs the operators, refuses anything
/// that fails validation, and resolves the initial state (explicit initial
/// overrides the preset default).
inline BuiltWalk build_walk(const WalkConfig& cfg, double validation_tol = 1e-10) {
    std::optional<TransitionOperators> ops;
    std::optional<BlockState> initial;

    if (cfg.preset) {
        Preset p = make_preset(*cfg.preset, cfg.params, cfg.angles);
        ops = std::move(p.ops);
        initial = std::move(p.initial);
    } else {
        ops = construct_operators(cfg);
    }

    const auto report = validate_transitions(*ops, validation_tol);
    if (!report.passed)
        throw DefinitionError("config: walk fails normalization, worst deviation " +
                              std::to_string(report.max_deviation));

    if (cfg.initial_vertex) {
        BlockState s = BlockState::point(ops->space(), ops->chirality_dim(),
                                         *cfg.initial_vertex, *cfg.initial_block);
        s.validate(1e-9);
        initial = std::move(s);
    }
    if (!initial)
        throw DefinitionError("config: no initial state given and the walk has no preset default");
    return BuiltWalk{std::move(*ops), std::move(*initial)};
}

// --- block-state JSON ---

inline json state_to_json(const BlockState& s) {
    json space;
    if (s.space().is_lattice())
        space = json{{"kind", "lattice_z"}, {"lo", s.space().lo()}, {"hi", s.space().hi()}};
    else
        space = json{{"kind", "finite_graph"}, {"count", s.space().count()}};
    json blocks = json::array();
    for (const auto& [v, rho] : s.blocks())
        blocks.push_back(json{{"vertex", v}, {"matrix", matrix_to_json(rho)}});
    return json{{"space", std::move(space)},
                {"chirality_dim", s.chirality_dim()},
                {"pruned_mass", s.pruned_mass()},
                {"blocks", std::move(blocks)}};
}

inline BlockState state_from_json(const json& j) {
    if (!j.contains("space") || !j.contains("chirality_dim") || !j.contains("blocks"))
        throw ParseError("state: missing space/chirality_dim/blocks");
    const json& sp = j.at("space");
    VertexSpace space = VertexSpace::finite_graph(1);
    if (sp.at("kind") == "lattice_z")
        space = VertexSpace::lattice_z(sp.at("lo").get<Vertex>(), sp.at("hi").get<Vertex>());
    else if (sp.at("kind") == "finite_graph")
        space = VertexSpace::finite_graph(sp.at("count").get<std::int64_t>());
    else
        throw ParseError("state: unknown space kind");
    BlockState s(space, j.at("chirality_dim").get<std::size_t>());
    for (const json& b : j.at("blocks"))
        s.set_block(b.at("vertex").get<Vertex>(), matrix_from_json(b.at("matrix")));
    if (j.contains("pruned_mass")) s.add_pruned_mass(j.at("pruned_mass").get<double>());
    return s;
}

// --- CSV distributions ---

inline std::string format_probability(double p) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", p);
    return buf;
}

inline std::string distribution_to_csv(const WalkDistribution& d,
                                       const std::vector<std::string>& comments = {}) {
    std::ostringstream out;
    for (const auto& line : comments) out << "# " << line << "\n";
    out << "vertex,probability\n";
    for (const auto& [v, p] : d.probs)
        out << v << "," << format_probability(p) << "\n";
    return out.str();
}

inline WalkDistribution distribution_from_csv(std::istream& in) {
    WalkDistribution d;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "vertex,probability")
                throw ParseError("distribution: expected 'vertex,probability' header");
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError("distribution: malformed row '" + line + "'");
        try {
            const Vertex v = std::stoll(line.substr(0, comma));
            const double p = std::stod(line.substr(comma + 1));
            d.probs[v] = p;
        } catch (const std::exception&) {
            throw ParseError("distribution: malformed row '" + line + "'");
        }
    }
    if (!header_seen) throw ParseError("distribution: missing header");
    return d;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    out << text;
}

} // namespace oqrw
