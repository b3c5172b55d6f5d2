#include "slasf/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <optional>
#include <random>
#include <thread>

#include "slasf/seeds.hpp"
#include "slasf/structural.hpp"
#include "slasf/verify.hpp"

namespace slasf {

namespace {

// Rank decisions closer than this many decades to the threshold are treated as ambiguous.
constexpr double kMarginalDecades = 2.0;

}  // namespace

std::string distribution_name(Distribution d) {
    return d == Distribution::uniform ? "uniform" : "standard-normal";
}

Distribution parse_distribution(const std::string& name) {
    if (name == "standard-normal" || name == "normal") return Distribution::standard_normal;
    if (name == "uniform") return Distribution::uniform;
    throw ValidationError("unknown distribution '" + name + "' (standard-normal | uniform)");
}

SwitchedSystem random_system(Eigen::Index n, const std::vector<Eigen::Index>& m,
                             Distribution dist, std::uint64_t seed, const TolerancePolicy& pol) {
    if (n < 1 || m.empty()) throw ValidationError("random_system: need n >= 1 and at least one subsystem");
    for (auto mi : m) {
        if (mi < 1 || mi > n) throw ValidationError("random_system: input dimensions must lie in 1..n");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    const auto draw = [&] { return dist == Distribution::uniform ? uniform(rng) : normal(rng); };

    std::vector<Subsystem> subs;
    for (size_t i = 0; i < m.size(); ++i) {
        bool ok = false;
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
            Subsystem s{Matrix(n, n), Matrix(n, m[i])};
            for (Eigen::Index k = 0; k < s.a.size(); ++k) s.a.data()[k] = draw();
            for (Eigen::Index k = 0; k < s.b.size(); ++k) s.b.data()[k] = draw();
            try {
                SwitchedSystem single({s}, pol);
                subs.push_back(std::move(s));
                ok = true;
            } catch (const ValidationError&) {
            }
        }
        if (!ok) {
            throw Error("random_system: subsystem " + std::to_string(i + 1) +
                        " failed validation in 100 draws");
        }
    }
    return SwitchedSystem(std::move(subs), pol);
}

void ExperimentSpec::validate() const {
    if (n < 1) throw ValidationError("experiment: n must be positive");
    if (m.empty()) throw ValidationError("experiment: need at least one subsystem");
    for (auto mi : m) {
        if (mi < 1 || mi > n) throw ValidationError("experiment: input dimensions must lie in 1..n");
    }
    if (trials < 1) throw ValidationError("experiment: trials must be at least 1");
    if (simulate_steps < 0) throw ValidationError("experiment: negative simulation length");
    tolerance.validate();
    config.schedule.validate(n, static_cast<int>(m.size()));
}

TrialResult run_trial(const ExperimentSpec& spec, int trial) {
    TrialResult row;
    row.trial = trial;
    row.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(trial));
    const TolerancePolicy& pol = spec.tolerance;

    std::optional<SwitchedSystem> sys;
    try {
        sys.emplace(random_system(spec.n, spec.m, spec.distribution, row.seed, pol));
        row.valid = true;
    } catch (const Error& e) {
        row.fail_cause = e.what();
        return row;
    }

    const GenericityReport rep = genericity_precheck(*sys, pol);
    row.rho = rep.rho;
    row.q1 = rep.q1;
    row.transverse = rep.transverse;
    row.verdict = rep.verdict;
    row.routes_agree = rep.routes_agree;
    row.rank_margin = rep.rank_margin;

    DesignConfig cfg = spec.config;
    cfg.seed = derive_seed(row.seed, 1);
    std::vector<IterationRecord> records;
    std::optional<DesignResult> result;
    try {
        result.emplace(design(*sys, cfg, pol));
        records = result->records;
        row.design_success = true;
    } catch (const DesignFailed& e) {
        records = e.partial_trace();
        row.fail_ell = e.ell();
        row.fail_cause = e.cause();
    }

    row.all_p_positive = static_cast<Eigen::Index>(records.size()) == spec.n;
    for (const auto& r : records) {
        row.p_trace.push_back(r.p_ell);
        row.all_p_positive = row.all_p_positive && r.p_ell > 0;
        row.probe_used = row.probe_used || r.probed;
        for (double res : r.residuals) row.max_residual = std::max(row.max_residual, res);
    }
    // The trace laws only speak about completed iterations.
    std::vector<IterationRecord> completed = records;
    if (!row.design_success && !completed.empty()) completed.pop_back();
    const TraceCheck tc = check_trace(completed);
    row.trace_ok = tc.ok();
    for (const auto* list : {&tc.rank_evolution, &tc.p_step, &tc.positive_window, &tc.escape}) {
        row.trace_violations.insert(row.trace_violations.end(), list->begin(), list->end());
    }

    if (row.verdict && !(row.design_success && row.all_p_positive)) {
        const bool marginal = !row.routes_agree || row.rank_margin < kMarginalDecades;
        row.tolerance_marginal = marginal;
        row.theorem_violation = !marginal;
    }

    if (result) {
        const VerificationReport vr = verify_design(*sys, result->design, pol);
        row.verification_pass = vr.pass;
        row.triangularity_residual = vr.triangularity_residual;
        row.eigenvalue_match_error = vr.eigenvalue_match_error;
        row.cqlf_found = vr.cqlf.has_value();
        row.cqlf_margin = vr.cqlf_margin;
        if (spec.simulate_steps > 0 && vr.cqlf) {
            const SwitchingSignal sig = SwitchingSignal::uniform_random(
                sys->count(), spec.simulate_steps, derive_seed(row.seed, 2));
            Vector x0 = Vector::Ones(spec.n);
            const Trajectory traj = simulate(*sys, result->design, sig, x0, spec.simulate_steps, pol);
            for (size_t k = 0; k + 1 < traj.lyapunov.size(); ++k) {
                if (traj.lyapunov[k] > 1e-250 && !(traj.lyapunov[k + 1] < traj.lyapunov[k])) {
                    row.lyapunov_decreasing = false;
                    break;
                }
            }
        }
    }
    return row;
}

ExperimentSummary run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<TrialResult> rows(static_cast<size_t>(spec.trials));
    unsigned threads = spec.threads != 0 ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(spec.trials));

    std::atomic<int> next{0};
    const auto worker = [&] {
        for (int t = next++; t < spec.trials; t = next++) rows[static_cast<size_t>(t)] = run_trial(spec, t);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    ExperimentSummary s;
    s.trials = spec.trials;
    s.rho_histogram.resize(spec.m.size());
    for (const auto& row : rows) {
        if (!row.valid) continue;
        ++s.valid;
        s.precheck_true += row.verdict;
        s.design_success += row.design_success;
        s.design_success_probe += row.design_success && row.probe_used;
        s.verification_pass += row.verification_pass;
        s.cqlf_found += row.cqlf_found;
        if (spec.simulate_steps > 0 && row.cqlf_found) {
            ++s.lyapunov_checked;
            s.lyapunov_violations += !row.lyapunov_decreasing;
        }
        s.theorem_violations += row.theorem_violation;
        s.tolerance_marginal += row.tolerance_marginal;
        s.trace_violations += !row.trace_ok;
        for (size_t i = 0; i < row.rho.size(); ++i) ++s.rho_histogram[i][row.rho[i]];
        ++s.q1_histogram[row.q1];
        for (size_t l = 0; l < row.p_trace.size(); ++l) ++s.p_histogram[static_cast<int>(l) + 1][row.p_trace[l]];
        if (!row.design_success) s.failures.push_back({row.trial, row.fail_ell, row.fail_cause, row.p_trace});
    }
    s.rows = std::move(rows);
    return s;
}

}  // namespace slasf
