// Command-line front end: validate walk configurations, run exact evolutions,
// trajectory sampling and physical realizations, and compute distribution
// statistics. Exit codes: 0 pass, 1 domain/validation failure, 2 parse/I-O.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include "oqrw/oqrw.hpp"

using namespace oqrw;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

StepOptions step_options_from_env() {
    StepOptions opts;
    if (const char* cap = std::getenv("OQRW_WINDOW_CAP")) {
        try {
            opts.window_cap = std::stoll(cap);
        } catch (const std::exception&) {
            throw ParseError("OQRW_WINDOW_CAP is not an integer");
        }
    }
    return opts;
}

WalkConfig load_config(const std::string& path) {
    return parse_config(read_text_file(path));
}

void write_or_print(const std::optional<std::string>& out_path, const std::string& text) {
    if (out_path)
        write_text_file(*out_path, text);
    else
        std::cout << text;
}

std::string snapshot_path(const std::string& base, std::int64_t n) {
    const auto dot = base.rfind('.');
    if (dot == std::string::npos || base.rfind('/') > dot)
        return base + ".n" + std::to_string(n);
    return base.substr(0, dot) + ".n" + std::to_string(n) + base.substr(dot);
}

// Requires the initial state to live on a single vertex.
TrajectoryState trajectory_initial(const BlockState& s) {
    if (s.blocks().size() != 1)
        throw DomainError("trajectory: initial state must occupy a single vertex");
    const auto& [v, rho] = *s.blocks().begin();
    return TrajectoryState{v, MixedLocal{rho}};
}

// Extracts |phi> from a (numerically) rank-one density block.
ComplexVector pure_component(const ComplexMatrix& rho, double tol = 1e-9) {
    const auto n = static_cast<Eigen::Index>(rho.rows());
    Eigen::MatrixXcd em(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            em(r, c) = rho(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(em);
    const auto& evals = solver.eigenvalues();
    if (std::abs(evals(n - 1) - 1.0) > tol)
        throw DomainError("the decoherence-free cycle needs a pure initial block");
    ComplexVector phi(static_cast<std::size_t>(n));
    for (Eigen::Index h = 0; h < n; ++h) phi[static_cast<std::size_t>(h)] = solver.eigenvectors()(h, n - 1);
    // fix the global phase: largest component real positive
    std::size_t big = 0;
    for (std::size_t h = 1; h < phi.size(); ++h)
        if (std::abs(phi[h]) > std::abs(phi[big])) big = h;
    const Complex rot = std::abs(phi[big]) / phi[big];
    for (auto& a : phi) a *= rot;
    return phi;
}

int cmd_validate(const std::string& config_path, double tol, bool unitary_condition) {
    const WalkConfig cfg = load_config(config_path);
    const TransitionOperators ops = construct_operators(cfg);
    const auto report = validate_transitions(ops, tol);
    for (const auto& entry : report.per_source) {
        if (report.stationary)
            std::cout << "source (all lattice sites): deviation " << fmt(entry.deviation)
                      << "\n";
        else
            std::cout << "source " << entry.source << ": deviation "
                      << fmt(entry.deviation) << "\n";
    }
    std::cout << "normalization: " << (report.passed ? "PASS" : "FAIL")
              << " (max deviation " << fmt(report.max_deviation) << ", tolerance "
              << fmt(tol) << ")\n";
    bool ok = report.passed;
    if (unitary_condition) {
        const auto rep = check_unitary_walk_condition(ops, tol);
        std::cout << "pairwise condition: " << (rep.passed ? "PASS" : "FAIL")
                  << " (max deviation " << fmt(rep.max_deviation) << " at sources ("
                  << rep.worst_j << ", " << rep.worst_jp << "))\n";
        ok = ok && rep.passed;
    }
    return ok ? 0 : 1;
}

int cmd_evolve(const std::string& config_path, std::optional<std::int64_t> steps_flag,
               const std::optional<std::string>& out, const std::string& format,
               std::int64_t snapshot_every,
               const std::optional<std::string>& initial_state_path) {
    const WalkConfig cfg = load_config(config_path);
    BuiltWalk walk = build_walk(cfg);
    if (initial_state_path) {
        json j;
        try {
            j = json::parse(read_text_file(*initial_state_path));
        } catch (const json::exception& e) {
            throw ParseError(std::string("state file: ") + e.what());
        }
        BlockState s = state_from_json(j);
        if (s.chirality_dim() != walk.ops.chirality_dim())
            throw DefinitionError("initial state chirality dimension mismatch");
        s.validate(1e-9);
        walk.initial = std::move(s);
    }

    std::int64_t steps = 0;
    if (steps_flag)
        steps = *steps_flag;
    else if (cfg.run && cfg.run->steps)
        steps = *cfg.run->steps;
    else
        throw ParseError("evolve: --steps missing and the config gives none");

    const StepOptions opts = step_options_from_env();
    auto emit = [&](const BlockState& s, const std::optional<std::string>& path) {
        if (format == "json")
            write_or_print(path, state_to_json(s).dump(2) + "\n");
        else
            write_or_print(path, distribution_to_csv(distribution(s)));
    };

    BlockState state = walk.initial;
    for (std::int64_t n = 1; n <= steps; ++n) {
        state = step(state, walk.ops, opts);
        if (snapshot_every > 0 && n % snapshot_every == 0 && n != steps) {
            if (!out) throw ParseError("evolve: --snapshot-every needs --out");
            emit(state, snapshot_path(*out, n));
        }
    }
    emit(state, out);
    return 0;
}

int cmd_trajectory(const std::string& config_path, std::optional<std::int64_t> steps_flag,
                   std::optional<std::int64_t> samples_flag,
                   std::optional<std::uint64_t> seed_flag,
                   const std::optional<std::string>& out) {
    const WalkConfig cfg = load_config(config_path);
    const BuiltWalk walk = build_walk(cfg);

    std::optional<std::int64_t> steps_opt = steps_flag;
    std::optional<std::int64_t> samples_opt = samples_flag;
    std::optional<std::uint64_t> seed_opt = seed_flag;
    if (cfg.run) {
        if (!steps_opt) steps_opt = cfg.run->steps;
        if (!samples_opt) samples_opt = cfg.run->samples;
        if (!seed_opt) seed_opt = cfg.run->seed;
    }
    if (!steps_opt) throw ParseError("trajectory: --steps missing and the config gives none");
    if (!samples_opt)
        throw ParseError("trajectory: --samples missing and the config gives none");
    const std::int64_t steps = *steps_opt;
    const std::int64_t samples = *samples_opt;
    const std::uint64_t seed = seed_opt.value_or(0);

    const TrajectoryState initial = trajectory_initial(walk.initial);
    const auto ensemble = sample_trajectories(initial, walk.ops, steps, samples, seed);
    const std::vector<std::string> meta = {
        "seed=" + std::to_string(seed),
        "samples=" + std::to_string(samples),
        "steps=" + std::to_string(steps),
    };
    write_or_print(out, distribution_to_csv(ensemble.empirical, meta));
    return 0;
}

int cmd_realize(const std::string& config_path, std::optional<std::int64_t> steps_flag,
                const std::optional<std::string>& out, bool compare,
                bool skip_decoherence) {
    const WalkConfig cfg = load_config(config_path);
    const BuiltWalk walk = build_walk(cfg);
    if (!skip_decoherence && cfg.run && cfg.run->mode == "unitary") skip_decoherence = true;

    std::int64_t steps = 0;
    if (steps_flag)
        steps = *steps_flag;
    else if (cfg.run && cfg.run->steps)
        steps = *cfg.run->steps;
    else
        throw ParseError("realize: --steps missing and the config gives none");

    // truncation register: the graph itself, or a lattice window wide enough
    // that mass cannot reach the cyclic seam within the horizon
    VertexSpace trunc = walk.ops.space();
    if (trunc.is_lattice()) {
        const Vertex lo = walk.initial.support_lo() - steps - 2;
        const Vertex hi = walk.initial.support_hi() + steps + 2;
        trunc = VertexSpace::lattice_z(lo, hi);
    }
    const std::size_t d = walk.ops.chirality_dim();
    const auto w = static_cast<std::size_t>(trunc.count());
    if (!skip_decoherence && d * w * w > 2048)
        throw DomainError("realize: tripartite dimension " + std::to_string(d * w * w) +
                          " too large; reduce --steps");

    std::ostringstream csv;
    csv << "step,vertex,probability\n";
    auto emit = [&](std::int64_t n, const WalkDistribution& dist) {
        for (const auto& [v, p] : dist.probs)
            if (p > 0.0) csv << n << "," << v << "," << fmt(p) << "\n";
    };

    double max_dev = 0.0;
    if (skip_decoherence) {
        const auto rep = check_unitary_walk_condition(walk.ops, 1e-10);
        if (!rep.passed) {
            std::cerr << "error: pairwise condition fails (deviation "
                      << fmt(rep.max_deviation) << "); the decoherence-free cycle "
                      << "needs it\n";
            return 1;
        }
        const TrajectoryState ini = trajectory_initial(walk.initial);
        const auto& rho = std::get<MixedLocal>(ini.local).density;
        UnitaryWalkState psi;
        psi.amplitudes[ini.vertex] = pure_component(rho);

        TripartitePure state = canonical_pure(psi, trunc, d);
        UnitaryWalkState reference = psi;
        emit(0, reference.distribution());
        for (std::int64_t n = 1; n <= steps; ++n) {
            state = unitary_cycle_step(state, walk.ops);
            reference = unitary_walk_step(reference, walk.ops);
            const auto got = read_pure_marginal(state).distribution();
            emit(n, got);
            if (compare) max_dev = std::max(max_dev, total_variation(got, reference.distribution()));
        }
    } else {
        TripartiteState state = canonical_tripartite(walk.initial, trunc);
        BlockState reference = walk.initial;
        const StepOptions opts = step_options_from_env();
        emit(0, distribution(read_walk_marginal(state)));
        for (std::int64_t n = 1; n <= steps; ++n) {
            state = physical_step(state, walk.ops);
            const BlockState got = read_walk_marginal(state);
            emit(n, distribution(got));
            if (compare) {
                reference = step(reference, walk.ops, opts);
                for (const auto& [v, rho] : reference.blocks()) {
                    const ComplexMatrix* other = got.block(v);
                    max_dev = std::max(max_dev, other ? max_abs_diff(rho, *other)
                                                      : max_abs(rho));
                }
            }
        }
    }

    write_or_print(out, csv.str());
    if (compare)
        std::cout << "max deviation vs exact evolution: " << fmt(max_dev) << "\n";
    return 0;
}

int cmd_stats(const std::string& dist_path, bool gaussian,
              const std::vector<double>& konno_args) {
    std::ifstream in(dist_path);
    if (!in) throw ParseError("cannot open file: " + dist_path);
    const WalkDistribution dist = distribution_from_csv(in);

    const MomentSummary m = moments(dist);
    std::cout << "mean=" << fmt(m.mean) << "\n";
    std::cout << "variance=" << fmt(m.variance) << "\n";
    std::cout << "total_mass=" << fmt(m.total_mass) << "\n";
    if (gaussian)
        std::cout << "gaussian_discrepancy=" << fmt(gaussian_discrepancy(dist)) << "\n";
    if (!konno_args.empty()) {
        const double a = konno_args[0], lambda = konno_args[1];
        Vertex scale = 0;
        for (const auto& [v, _] : dist.probs) scale = std::max<Vertex>(scale, std::llabs(v));
        if (scale == 0) throw DomainError("stats: cannot rescale a point mass at 0");
        std::cout << "vertex,x,probability,konno_density\n";
        for (const auto& [v, p] : dist.probs) {
            const double x = static_cast<double>(v) / static_cast<double>(scale);
            if (std::abs(x) >= a) continue;
            std::cout << v << "," << fmt(x) << "," << fmt(p) << ","
                      << fmt(konno_density(a, lambda, x)) << "\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"open quantum random walk simulator"};
    app.require_subcommand(1);

    std::string config_path, dist_path;
    std::optional<std::int64_t> steps, samples;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out, initial_state;
    std::string format = "csv";
    std::int64_t snapshot_every = 0;
    double tol = 1e-10;
    bool unitary_condition = false, compare = false, skip_decoherence = false,
         gaussian = false;
    std::vector<double> konno_args;

    auto* validate = app.add_subcommand("validate", "check walk normalization");
    validate->add_option("config", config_path, "walk configuration (JSON)")->required();
    validate->add_option("--tolerance", tol, "validation tolerance");
    validate->add_flag("--unitary-condition", unitary_condition,
                       "also check the pairwise amplitude-walk condition");

    auto* evolve = app.add_subcommand("evolve", "exact evolution of the block state");
    evolve->add_option("config", config_path)->required();
    evolve->add_option("--steps", steps, "number of steps");
    evolve->add_option("--out", out, "output file (default: stdout)");
    evolve->add_option("--format", format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
    evolve->add_option("--snapshot-every", snapshot_every,
                       "write intermediate outputs every k steps");
    evolve->add_option("--initial-state", initial_state,
                       "JSON block-state file overriding the initial state");

    auto* trajectory = app.add_subcommand("trajectory", "Monte Carlo trajectory sampling");
    trajectory->add_option("config", config_path)->required();
    trajectory->add_option("--steps", steps);
    trajectory->add_option("--samples", samples);
    trajectory->add_option("--seed", seed);
    trajectory->add_option("--out", out);

    auto* realize = app.add_subcommand("realize", "tripartite physical realization");
    realize->add_option("config", config_path)->required();
    realize->add_option("--steps", steps);
    realize->add_option("--out", out);
    realize->add_flag("--compare", compare, "report max deviation from exact evolution");
    realize->add_flag("--skip-decoherence", skip_decoherence,
                      "run the decoherence-free cycle (needs the pairwise condition)");

    auto* stats = app.add_subcommand("stats", "moments and distribution comparisons");
    stats->add_option("distribution", dist_path, "distribution CSV")->required();
    stats->add_flag("--gaussian", gaussian, "compare against a discretized normal");
    stats->add_option("--konno", konno_args, "a lambda: tabulate the limit density")
        ->expected(2);

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(config_path, tol, unitary_condition);
        if (evolve->parsed())
            return cmd_evolve(config_path, steps, out, format, snapshot_every,
                              initial_state);
        if (trajectory->parsed())
            return cmd_trajectory(config_path, steps, samples, seed, out);
        if (realize->parsed())
            return cmd_realize(config_path, steps, out, compare, skip_decoherence);
        if (stats->parsed()) return cmd_stats(dist_path, gaussian, konno_args);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const WindowOverflowError& e) {
        std::cerr << "error: " << e.what()
                  << " (set OQRW_WINDOW_CAP to raise the cap)\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
