#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "slasf/errors.hpp"
#include "slasf/montecarlo.hpp"
#include "slasf/serialize.hpp"
#include "slasf/structural.hpp"
#include "slasf/triangularize.hpp"
#include "slasf/verify.hpp"

namespace slasf::cli {

namespace {

using io::Json;

std::vector<double> parse_doubles(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) {
            throw ValidationError(flag + ": '" + item + "' is not a number");
        }
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError(flag + ": empty list");
    return out;
}

std::vector<int> parse_ints(const std::string& text, const std::string& flag) {
    std::vector<int> out;
    for (double v : parse_doubles(text, flag)) {
        if (v != static_cast<double>(static_cast<int>(v))) {
            throw ValidationError(flag + ": '" + std::to_string(v) + "' is not an integer");
        }
        out.push_back(static_cast<int>(v));
    }
    return out;
}

// Flags shared by the subcommands that run the design iteration.
struct DesignFlags {
    std::string lambda = "0.5";
    int probe_budget = 25;
    std::uint64_t seed = 0;
    long kernel_index = 0;
    bool diagnostic = false;

    void attach(CLI::App* app, bool with_seed) {
        app->add_option("--lambda", lambda,
                        "closed-loop eigenvalue: one constant or a comma list with one per iteration")
            ->capture_default_str();
        app->add_option("--probe-budget", probe_budget, "random eigenvalue draws when p <= 0")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        if (with_seed) app->add_option("--seed", seed, "seed of the eigenvalue probe")->capture_default_str();
        app->add_option("--kernel-index", kernel_index, "kernel direction, 0 = smallest singular value")
            ->capture_default_str()
            ->check(CLI::NonNegativeNumber);
        app->add_flag("--diagnostic-subspaces", diagnostic,
                      "recompute assignable subspaces every iteration and check their evolution");
    }

    DesignConfig config() const {
        DesignConfig cfg;
        const std::vector<double> values = parse_doubles(lambda, "--lambda");
        cfg.schedule = values.size() == 1 ? EigenvalueSchedule::constant(values.front())
                                          : EigenvalueSchedule::per_iteration(values);
        cfg.probe_budget = probe_budget;
        cfg.seed = seed;
        cfg.kernel_index = kernel_index;
        cfg.diagnostic_subspaces = diagnostic;
        return cfg;
    }
};

struct TolFlags {
    TolerancePolicy pol;

    void attach(CLI::App* app) {
        app->add_option("--tol-rank", pol.rank_rel_tol, "relative singular-value threshold")
            ->capture_default_str();
        app->add_option("--tol-residual", pol.residual_tol, "eigen-residual acceptance")
            ->capture_default_str();
        app->add_option("--tol-angle", pol.angle_tol, "subspace membership threshold")
            ->capture_default_str();
    }
};

class Outputs {
public:
    explicit Outputs(std::vector<std::string> inputs) : inputs_(std::move(inputs)) {}

    // Refuses to overwrite any input file.
    void check(const std::string& path) const {
        if (path.empty()) return;
        std::error_code ec;
        for (const auto& in : inputs_) {
            if (std::filesystem::equivalent(path, in, ec)) {
                throw ValidationError("output '" + path + "' would overwrite input '" + in + "'");
            }
        }
    }

    static void write(const std::string& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write '" + path + "'");
        out << text;
        if (!out.flush()) throw ValidationError("write failed for '" + path + "'");
    }

private:
    std::vector<std::string> inputs_;
};

std::string join(const std::vector<Eigen::Index>& values) {
    std::string s;
    for (size_t k = 0; k < values.size(); ++k) s += (k ? "," : "") + std::to_string(values[k]);
    return s;
}

std::string join(const std::vector<int>& values) {
    std::string s;
    for (size_t k = 0; k < values.size(); ++k) s += (k ? "," : "") + std::to_string(values[k]);
    return s;
}

int cmd_design(const std::string& system_path, const std::string& out_path, const DesignFlags& flags,
               const TolerancePolicy& pol, std::ostream& out, std::ostream& err) {
    Outputs outputs({system_path});
    outputs.check(out_path);
    const DesignConfig cfg = flags.config();
    const SwitchedSystem sys = load_system_file(system_path, pol);
    cfg.schedule.validate(sys.n(), sys.count());

    try {
        const DesignResult result = design(sys, cfg, pol);
        Json j = io::design_to_json(result.design);
        j["status"] = "ok";
        j["trace"] = io::trace_to_json(result.records);
        if (cfg.diagnostic_subspaces) j["diagnostic_violations"] = result.diagnostic_violations;
        Outputs::write(out_path, io::dump(j));
        std::vector<int> p;
        for (const auto& r : result.records) p.push_back(r.p_ell);
        out << "design ok: n = " << sys.n() << ", N = " << sys.count() << ", p = " << join(p) << "\n";
        for (const auto& v : result.diagnostic_violations) out << "diagnostic: " << v << "\n";
        return ok;
    } catch (const DesignFailed& e) {
        Json j = {{"status", "failed"},
                  {"ell", e.ell()},
                  {"cause", e.cause()},
                  {"trace", io::trace_to_json(e.partial_trace())}};
        Outputs::write(out_path, io::dump(j));
        err << "design failed: " << e.cause() << "\n";
        return design_failed;
    }
}

int cmd_precheck(const std::string& system_path, const std::string& out_path,
                 const TolerancePolicy& pol, std::ostream& out) {
    Outputs outputs({system_path});
    outputs.check(out_path);
    const SwitchedSystem sys = load_system_file(system_path, pol);
    const GenericityReport rep = genericity_precheck(sys, pol);
    if (!out_path.empty()) Outputs::write(out_path, io::dump(io::genericity_to_json(rep)));
    out << "rho = (" << join(rep.rho) << "), q1 = " << rep.q1
        << ", transverse = " << (rep.transverse ? "yes" : "no")
        << ", verdict = " << (rep.verdict ? "true" : "false") << "\n";
    if (!rep.routes_agree) out << "warning: assignable-subspace and index routes disagree\n";
    return rep.verdict ? ok : precheck_false;
}

int cmd_verify(const std::string& system_path, const std::string& design_path,
               const std::string& out_path, const TolerancePolicy& pol, std::ostream& out) {
    Outputs outputs({system_path, design_path});
    outputs.check(out_path);
    const SwitchedSystem sys = load_system_file(system_path, pol);
    const FeedbackDesign d = load_design_file(design_path);
    const VerificationReport rep = verify_design(sys, d, pol);
    if (!out_path.empty()) Outputs::write(out_path, io::dump(io::verification_to_json(rep)));
    out << "verify " << (rep.pass ? "pass" : "FAIL") << "\n";
    for (const auto& f : rep.failures) out << "  " << f << "\n";
    return rep.pass ? ok : verify_failed;
}

struct SimFlags {
    std::string mode = "uniform-random";
    int steps = 100;
    std::uint64_t seed = 0;
    int subsystem = 1;
    std::string sequence;
    std::string x0;
    std::string format = "json";
};

int cmd_simulate(const std::string& system_path, const std::string& design_path,
                 const std::string& out_path, const SimFlags& flags, const TolerancePolicy& pol,
                 std::ostream& out) {
    Outputs outputs({system_path, design_path});
    outputs.check(out_path);
    const SwitchedSystem sys = load_system_file(system_path, pol);
    const FeedbackDesign d = load_design_file(design_path);

    SwitchingSignal sig;
    if (flags.mode == "fixed") {
        sig = SwitchingSignal::fixed(flags.subsystem, flags.steps);
    } else if (flags.mode == "uniform-random") {
        sig = SwitchingSignal::uniform_random(sys.count(), flags.steps, flags.seed);
    } else if (flags.mode == "round-robin") {
        sig = SwitchingSignal::round_robin(sys.count(), flags.steps);
    } else {
        if (flags.sequence.empty()) throw ValidationError("--mode custom needs --sequence");
        sig = SwitchingSignal::custom(parse_ints(flags.sequence, "--sequence"));
    }
    int steps = flags.steps;
    if (flags.mode == "custom" && static_cast<int>(sig.sequence.size()) < steps) {
        steps = static_cast<int>(sig.sequence.size());
    }
    Vector x0 = Vector::Ones(sys.n());
    if (!flags.x0.empty()) {
        const std::vector<double> v = parse_doubles(flags.x0, "--x0");
        if (static_cast<Eigen::Index>(v.size()) != sys.n()) {
            throw ValidationError("--x0 needs " + std::to_string(sys.n()) + " entries");
        }
        x0 = Eigen::Map<const Vector>(v.data(), sys.n());
    }
    const Trajectory traj = simulate(sys, d, sig, x0, steps, pol);
    if (!out_path.empty()) {
        Outputs::write(out_path, flags.format == "csv" ? trajectory_csv(traj)
                                                       : io::dump(io::trajectory_to_json(traj, sig)));
    }
    out << "simulated " << steps << " steps (" << mode_name(sig.mode) << "), |x_final| = "
        << traj.states.back().norm();
    if (traj.cqlf) out << ", V_final = " << traj.lyapunov.back();
    out << "\n";
    return ok;
}

int cmd_random(Eigen::Index n, const std::string& m_text, std::uint64_t seed,
               const std::string& distribution, const std::string& out_path,
               const TolerancePolicy& pol, std::ostream& out) {
    std::vector<Eigen::Index> m;
    for (int v : parse_ints(m_text, "--m")) m.push_back(v);
    const Distribution dist = parse_distribution(distribution);
    const SwitchedSystem sys = random_system(n, m, dist, seed, pol);
    Outputs::write(out_path, io::dump(io::system_to_json(sys)));
    out << "wrote random system n = " << n << ", m = (" << join(m) << ") to " << out_path << "\n";
    return ok;
}

struct McFlags {
    std::string spec_path;
    Eigen::Index n = 6;
    std::string m = "4,5";
    int trials = 200;
    std::uint64_t seed = 42;
    std::string distribution = "standard-normal";
    int simulate_steps = 0;
    unsigned threads = 0;
    std::string format = "json";
    std::string rows_path;
};

// Keys of a spec file; explicit flags override them.
void apply_spec_file(const std::string& path, McFlags& f, DesignFlags& d, const CLI::App& app) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open spec file '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ValidationError(std::string("parse failure: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("parse failure: spec file must hold an object");
    const auto given = [&](const std::string& flag) { return app.count(flag) > 0; };
    try {
        if (j.contains("n") && !given("--n")) f.n = j["n"].get<Eigen::Index>();
        if (j.contains("m") && !given("--m")) {
            std::string s;
            for (const auto& v : j["m"]) s += (s.empty() ? "" : ",") + std::to_string(v.get<int>());
            f.m = s;
        }
        if (j.contains("trials") && !given("--trials")) f.trials = j["trials"].get<int>();
        if (j.contains("seed") && !given("--seed")) f.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("distribution") && !given("--distribution")) f.distribution = j["distribution"].get<std::string>();
        if (j.contains("simulate_steps") && !given("--simulate-steps")) f.simulate_steps = j["simulate_steps"].get<int>();
        if (j.contains("probe_budget") && !given("--probe-budget")) d.probe_budget = j["probe_budget"].get<int>();
        if (j.contains("kernel_index") && !given("--kernel-index")) d.kernel_index = j["kernel_index"].get<long>();
        if (j.contains("lambda") && !given("--lambda")) {
            const Json& l = j["lambda"];
            std::ostringstream s;
            s.precision(17);
            if (l.is_array()) {
                for (size_t k = 0; k < l.size(); ++k) s << (k ? "," : "") << l[k].get<double>();
            } else {
                s << l.get<double>();
            }
            d.lambda = s.str();
        }
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("spec file: ") + e.what());
    }
}

int cmd_montecarlo(McFlags f, DesignFlags d, const TolerancePolicy& pol, const std::string& out_path,
                   const CLI::App& app, std::ostream& out) {
    std::vector<std::string> inputs;
    if (!f.spec_path.empty()) {
        inputs.push_back(f.spec_path);
        apply_spec_file(f.spec_path, f, d, app);
    }
    Outputs outputs(inputs);
    outputs.check(out_path);
    outputs.check(f.rows_path);

    ExperimentSpec spec;
    spec.n = f.n;
    for (int v : parse_ints(f.m, "--m")) spec.m.push_back(v);
    spec.trials = f.trials;
    spec.seed = f.seed;
    spec.distribution = parse_distribution(f.distribution);
    spec.config = d.config();
    spec.tolerance = pol;
    spec.simulate_steps = f.simulate_steps;
    spec.threads = f.threads;
    spec.validate();

    const ExperimentSummary s = run_experiment(spec);
    if (!out_path.empty()) {
        Outputs::write(out_path, f.format == "csv" ? io::trial_rows_csv(s)
                                                   : io::dump(io::summary_to_json(spec, s)));
    }
    if (!f.rows_path.empty()) Outputs::write(f.rows_path, io::trial_rows_csv(s));
    out << "trials " << s.trials << ", valid " << s.valid << ", precheck true " << s.precheck_true
        << ", design success " << s.design_success << ", verified " << s.verification_pass << "\n";
    out << "theorem violations " << s.theorem_violations << ", tolerance-marginal "
        << s.tolerance_marginal << ", trace violations " << s.trace_violations << "\n";
    if (spec.simulate_steps > 0) {
        out << "lyapunov checked " << s.lyapunov_checked << ", violations " << s.lyapunov_violations
            << "\n";
    }
    return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stabilizing feedback for discrete-time switched linear systems"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "slasf 0.1.0");

    std::string system_path, design_path, out_path;
    TolFlags tol;
    std::function<int()> action;

    auto* design_cmd = app.add_subcommand("design", "run the iterative triangularisation");
    DesignFlags design_flags;
    design_cmd->add_option("system", system_path, "system JSON")->required();
    design_cmd->add_option("-o,--out", out_path, "design JSON (partial trace on failure)")->required();
    design_flags.attach(design_cmd, true);
    tol.attach(design_cmd);
    design_cmd->callback([&] {
        action = [&] { return cmd_design(system_path, out_path, design_flags, tol.pol, out, err); };
    });

    auto* precheck_cmd = app.add_subcommand("precheck", "structural genericity check");
    precheck_cmd->add_option("system", system_path, "system JSON")->required();
    precheck_cmd->add_option("-o,--out", out_path, "report JSON");
    tol.attach(precheck_cmd);
    precheck_cmd->callback([&] { action = [&] { return cmd_precheck(system_path, out_path, tol.pol, out); }; });

    auto* verify_cmd = app.add_subcommand("verify", "check a design against a system");
    verify_cmd->add_option("system", system_path, "system JSON")->required();
    verify_cmd->add_option("design", design_path, "design JSON")->required();
    verify_cmd->add_option("-o,--out", out_path, "report JSON");
    tol.attach(verify_cmd);
    verify_cmd->callback([&] {
        action = [&] { return cmd_verify(system_path, design_path, out_path, tol.pol, out); };
    });

    auto* simulate_cmd = app.add_subcommand("simulate", "closed-loop trajectory under switching");
    SimFlags sim;
    simulate_cmd->add_option("system", system_path, "system JSON")->required();
    simulate_cmd->add_option("design", design_path, "design JSON")->required();
    simulate_cmd->add_option("-o,--out", out_path, "trajectory file");
    simulate_cmd->add_option("--mode", sim.mode, "switching signal")
        ->capture_default_str()
        ->check(CLI::IsMember({"fixed", "uniform-random", "round-robin", "custom"}));
    simulate_cmd->add_option("--steps", sim.steps, "number of steps")->capture_default_str()->check(CLI::NonNegativeNumber);
    simulate_cmd->add_option("--seed", sim.seed, "seed of uniform-random switching")->capture_default_str();
    simulate_cmd->add_option("--subsystem", sim.subsystem, "active subsystem for --mode fixed (1-based)")
        ->capture_default_str();
    simulate_cmd->add_option("--sequence", sim.sequence, "comma list of 1-based indices for --mode custom");
    simulate_cmd->add_option("--x0", sim.x0, "initial state as a comma list (default all ones)");
    simulate_cmd->add_option("--format", sim.format, "output format")
        ->capture_default_str()
        ->check(CLI::IsMember({"json", "csv"}));
    tol.attach(simulate_cmd);
    simulate_cmd->callback([&] {
        action = [&] { return cmd_simulate(system_path, design_path, out_path, sim, tol.pol, out); };
    });

    auto* random_cmd = app.add_subcommand("random", "draw a random switched system");
    Eigen::Index rand_n = 6;
    std::string rand_m = "4,5";
    std::uint64_t rand_seed = 0;
    std::string rand_dist = "standard-normal";
    random_cmd->add_option("--n", rand_n, "state dimension")->capture_default_str()->check(CLI::PositiveNumber);
    random_cmd->add_option("--m", rand_m, "input dimensions, one per subsystem")->capture_default_str();
    random_cmd->add_option("--seed", rand_seed, "seed")->capture_default_str();
    random_cmd->add_option("--distribution", rand_dist, "standard-normal | uniform")->capture_default_str();
    random_cmd->add_option("-o,--out", out_path, "system JSON")->required();
    tol.attach(random_cmd);
    random_cmd->callback([&] {
        action = [&] { return cmd_random(rand_n, rand_m, rand_seed, rand_dist, out_path, tol.pol, out); };
    });

    auto* mc_cmd = app.add_subcommand("montecarlo", "randomized genericity experiment");
    McFlags mc;
    DesignFlags mc_design;
    mc_cmd->add_option("--spec", mc.spec_path, "experiment spec JSON; flags given explicitly override it");
    mc_cmd->add_option("--n", mc.n, "state dimension")->capture_default_str()->check(CLI::PositiveNumber);
    mc_cmd->add_option("--m", mc.m, "input dimensions, one per subsystem")->capture_default_str();
    mc_cmd->add_option("--trials", mc.trials, "number of trials")->capture_default_str()->check(CLI::PositiveNumber);
    mc_cmd->add_option("--seed", mc.seed, "experiment seed")->capture_default_str();
    mc_cmd->add_option("--distribution", mc.distribution, "standard-normal | uniform")->capture_default_str();
    mc_cmd->add_option("--simulate-steps", mc.simulate_steps, "simulate each verified design")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    mc_cmd->add_option("--threads", mc.threads, "worker threads, 0 = hardware concurrency")->capture_default_str();
    mc_cmd->add_option("--format", mc.format, "json summary or csv per-trial rows")
        ->capture_default_str()
        ->check(CLI::IsMember({"json", "csv"}));
    mc_cmd->add_option("--rows", mc.rows_path, "also write per-trial rows as CSV");
    mc_cmd->add_option("-o,--out", out_path, "summary file");
    mc_design.attach(mc_cmd, false);
    tol.attach(mc_cmd);
    mc_cmd->callback([&] {
        action = [&] { return cmd_montecarlo(mc, mc_design, tol.pol, out_path, *mc_cmd, out); };
    });

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << "\n";
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return invalid;
    }

    try {
        tol.pol.validate();
        return action();
    } catch (const DesignFailed& e) {
        err << "design failed: " << e.cause() << "\n";
        return design_failed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return invalid;
    }
}

}  // namespace slasf::cli
