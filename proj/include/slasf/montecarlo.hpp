#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "slasf/model.hpp"
#include "slasf/triangularize.hpp"

namespace slasf {

enum class Distribution { standard_normal, uniform };  // uniform is on (-1, 1)

std::string distribution_name(Distribution d);
Distribution parse_distribution(const std::string& name);

// Entrywise i.i.d. subsystem matrices; a subsystem failing the rank or controllability check is
// redrawn up to 100 times. Deterministic in `seed`.
SwitchedSystem random_system(Eigen::Index n, const std::vector<Eigen::Index>& m,
                             Distribution dist, std::uint64_t seed,
                             const TolerancePolicy& pol = {});

struct ExperimentSpec {
    Eigen::Index n = 0;
    std::vector<Eigen::Index> m;  // one input dimension per subsystem
    int trials = 1;
    std::uint64_t seed = 0;
    Distribution distribution = Distribution::standard_normal;
    DesignConfig config;
    TolerancePolicy tolerance;
    // When positive, each verified design is also simulated for this many steps under
    // uniform-random switching and the Lyapunov decrease is checked.
    int simulate_steps = 0;
    unsigned threads = 0;  // 0 picks std::thread::hardware_concurrency()

    void validate() const;
};

// Outcome of one trial; also the row format of the per-trial CSV.
struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    bool valid = false;
    std::vector<Eigen::Index> rho;
    int q1 = 0;
    bool transverse = false;
    bool verdict = false;
    bool routes_agree = true;
    double rank_margin = 0.0;
    bool design_success = false;
    bool probe_used = false;
    int fail_ell = 0;
    std::string fail_cause;
    std::vector<int> p_trace;
    bool all_p_positive = false;
    bool trace_ok = true;
    std::vector<std::string> trace_violations;
    bool verification_pass = false;
    double max_residual = 0.0;
    double triangularity_residual = 0.0;
    double eigenvalue_match_error = 0.0;
    double cqlf_margin = 0.0;
    bool cqlf_found = false;
    bool lyapunov_decreasing = true;
    bool theorem_violation = false;
    bool tolerance_marginal = false;
};

struct FailureTrace {
    int trial = 0;
    int ell = 0;
    std::string cause;
    std::vector<int> p_trace;
};

struct ExperimentSummary {
    int trials = 0;
    int valid = 0;
    int precheck_true = 0;
    int design_success = 0;
    int design_success_probe = 0;  // successes that needed the random-eigenvalue probe
    int verification_pass = 0;
    int cqlf_found = 0;
    int lyapunov_checked = 0;
    int lyapunov_violations = 0;
    int theorem_violations = 0;
    int tolerance_marginal = 0;
    int trace_violations = 0;
    std::vector<std::map<Eigen::Index, int>> rho_histogram;  // per subsystem
    std::map<int, int> q1_histogram;
    std::map<int, std::map<int, int>> p_histogram;           // iteration -> p -> count
    std::vector<FailureTrace> failures;
    std::vector<TrialResult> rows;
};

TrialResult run_trial(const ExperimentSpec& spec, int trial);

// Trials run concurrently on independent sub-seeds; the summary depends only on the spec.
ExperimentSummary run_experiment(const ExperimentSpec& spec);

}  // namespace slasf
