#include "slasf/serialize.hpp"

#include <cstdio>
#include <string>

namespace slasf::io {

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& context) {
    if (!j.is_array()) throw ValidationError("parse failure: " + context + " is not a list of rows");
    if (j.empty()) return Matrix(0, 0);
    const size_t cols = j.front().is_array() ? j.front().size() : 0;
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (size_t r = 0; r < j.size(); ++r) {
        const Json& row = j[r];
        if (!row.is_array()) {
            throw ValidationError("parse failure: " + context + " row " + std::to_string(r + 1) +
                                  " is not a list");
        }
        if (row.size() != cols) {
            throw ValidationError("dimension mismatch: " + context + " has ragged rows");
        }
        for (size_t c = 0; c < cols; ++c) {
            if (!row[c].is_number()) {
                throw ValidationError("parse failure: " + context + " entry (" +
                                      std::to_string(r + 1) + "," + std::to_string(c + 1) +
                                      ") is not a number");
            }
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
        }
    }
    return m;
}

Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
    return out;
}

Vector vector_from_json(const Json& j, const std::string& context) {
    if (!j.is_array()) throw ValidationError("parse failure: " + context + " is not a list");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (size_t k = 0; k < j.size(); ++k) {
        if (!j[k].is_number()) {
            throw ValidationError("parse failure: " + context + " entry " + std::to_string(k + 1) +
                                  " is not a number");
        }
        v(static_cast<Eigen::Index>(k)) = j[k].get<double>();
    }
    return v;
}

Json system_to_json(const SwitchedSystem& sys) {
    Json subs = Json::array();
    for (const auto& s : sys.subsystems()) {
        subs.push_back({{"A", matrix_to_json(s.a)}, {"B", matrix_to_json(s.b)}});
    }
    return {{"n", sys.n()}, {"subsystems", std::move(subs)}};
}

Json design_to_json(const FeedbackDesign& design) {
    Json gains = Json::array();
    for (const auto& k : design.gains) gains.push_back(matrix_to_json(k));
    return {{"gains", std::move(gains)},
            {"transformation", matrix_to_json(design.transformation)},
            {"assigned_eigenvalues", matrix_to_json(design.assigned_eigenvalues)}};
}

Json record_to_json(const IterationRecord& rec) {
    Json f = Json::array();
    for (const auto& m : rec.f) f.push_back(matrix_to_json(m));
    Json j = {{"ell", rec.ell},
              {"n_ell", rec.n_ell},
              {"lambda", vector_to_json(rec.lambda)},
              {"v1", vector_to_json(rec.v1)},
              {"F", std::move(f)},
              {"m_ranks", rec.m_ranks},
              {"p_ell", rec.p_ell},
              {"kernel_dim", rec.kernel_dim},
              {"v1_in_all_images", rec.v1_in_all_images},
              {"v1_in_image", rec.v1_in_image},
              {"residuals", rec.residuals},
              {"probed", rec.probed},
              {"probe_attempts", rec.probe_attempts}};
    if (!rec.rho.empty()) {
        j["rho"] = rec.rho;
        j["v1_in_assignable"] = rec.v1_in_assignable;
    }
    return j;
}

Json trace_to_json(const std::vector<IterationRecord>& records) {
    Json out = Json::array();
    for (const auto& r : records) out.push_back(record_to_json(r));
    return out;
}

Json genericity_to_json(const GenericityReport& rep) {
    Json expected = Json::array();
    for (const auto& e : rep.rho_expected) {
        if (e) {
            expected.push_back(*e);
        } else {
            expected.push_back("no-generic-formula");
        }
    }
    Json subsets = Json::array();
    for (const auto& row : rep.per_subset_dims) {
        Json members = Json::array();
        for (int i : row.members) members.push_back(i + 1);
        subsets.push_back({{"subsystems", std::move(members)},
                           {"intersection_dim", row.intersection_dim},
                           {"expected_intersection_dim", row.expected_intersection},
                           {"sum_dim", row.sum_dim},
                           {"expected_sum_dim", row.expected_sum},
                           {"ok", row.ok()}});
    }
    return {{"rho", rep.rho},
            {"rho_from_indices", rep.rho_from_indices},
            {"rho_expected", std::move(expected)},
            {"q1", rep.q1},
            {"transverse", rep.transverse},
            {"verdict", rep.verdict},
            {"routes_agree", rep.routes_agree},
            {"rank_margin_decades", rep.rank_margin},
            {"per_subset_dims", std::move(subsets)}};
}

Json verification_to_json(const VerificationReport& rep) {
    Json j = {{"pass", rep.pass},
              {"spectral_radii", rep.spectral_radii},
              {"eigenvalue_match_error", rep.eigenvalue_match_error},
              {"eigensolver_match_error", rep.eigensolver_match_error},
              {"triangularity_residual", rep.triangularity_residual},
              {"orthogonality_defect", rep.orthogonality_defect},
              {"cqlf_margin", rep.cqlf_margin},
              {"failures", rep.failures}};
    if (rep.cqlf) {
        j["cqlf"] = matrix_to_json(*rep.cqlf);
        j["cqlf_delta"] = rep.cqlf_delta;
        j["cqlf_weights"] = rep.cqlf_adaptive ? "adaptive" : "geometric";
        j["cqlf_contraction"] = rep.cqlf_contraction;
    } else {
        j["cqlf"] = nullptr;
    }
    return j;
}

Json trajectory_to_json(const Trajectory& traj, const SwitchingSignal& signal) {
    Json states = Json::array();
    for (const auto& x : traj.states) states.push_back(vector_to_json(x));
    Json controls = Json::array();
    for (const auto& u : traj.controls) controls.push_back(vector_to_json(u));
    Json j = {{"mode", mode_name(signal.mode)},
              {"switching", traj.switching},
              {"states", std::move(states)},
              {"controls", std::move(controls)},
              {"lyapunov", traj.lyapunov}};
    if (signal.mode == SwitchingSignal::Mode::uniform_random) j["seed"] = signal.seed;
    j["cqlf"] = traj.cqlf ? matrix_to_json(traj.cqlf->p) : Json(nullptr);
    return j;
}

Json experiment_spec_to_json(const ExperimentSpec& spec) {
    return {{"n", spec.n},
            {"m", spec.m},
            {"N", spec.m.size()},
            {"trials", spec.trials},
            {"seed", spec.seed},
            {"distribution", distribution_name(spec.distribution)},
            {"probe_budget", spec.config.probe_budget},
            {"kernel_index", spec.config.kernel_index},
            {"simulate_steps", spec.simulate_steps}};
}

Json summary_to_json(const ExperimentSpec& spec, const ExperimentSummary& s) {
    Json rho = Json::array();
    for (const auto& hist : s.rho_histogram) {
        Json h = Json::object();
        for (const auto& [value, count] : hist) h[std::to_string(value)] = count;
        rho.push_back(std::move(h));
    }
    Json q1 = Json::object();
    for (const auto& [value, count] : s.q1_histogram) q1[std::to_string(value)] = count;
    Json p = Json::object();
    for (const auto& [ell, hist] : s.p_histogram) {
        Json h = Json::object();
        for (const auto& [value, count] : hist) h[std::to_string(value)] = count;
        p[std::to_string(ell)] = std::move(h);
    }
    Json failures = Json::array();
    for (const auto& f : s.failures) {
        failures.push_back({{"trial", f.trial}, {"ell", f.ell}, {"cause", f.cause}, {"p_trace", f.p_trace}});
    }
    return {{"spec", experiment_spec_to_json(spec)},
            {"counts",
             {{"trials", s.trials},
              {"valid", s.valid},
              {"precheck_true", s.precheck_true},
              {"design_success", s.design_success},
              {"design_success_probe", s.design_success_probe},
              {"verification_pass", s.verification_pass},
              {"cqlf_found", s.cqlf_found},
              {"lyapunov_checked", s.lyapunov_checked},
              {"lyapunov_violations", s.lyapunov_violations},
              {"theorem_violations", s.theorem_violations},
              {"tolerance_marginal", s.tolerance_marginal},
              {"trace_violations", s.trace_violations}}},
            {"rho_histogram", std::move(rho)},
            {"q1_histogram", std::move(q1)},
            {"p_histogram", std::move(p)},
            {"failures", std::move(failures)}};
}

std::string trial_rows_csv(const ExperimentSummary& summary) {
    std::string out =
        "trial,seed,valid,rho,q1,transverse,verdict,design_success,probe_used,fail_ell,p_trace,"
        "verification_pass,cqlf_margin,theorem_violation,tolerance_marginal\n";
    const auto join = [](const auto& values) {
        std::string s;
        for (size_t k = 0; k < values.size(); ++k) s += (k ? ";" : "") + std::to_string(values[k]);
        return s;
    };
    char margin[40];
    for (const auto& r : summary.rows) {
        std::snprintf(margin, sizeof margin, "%.17g", r.cqlf_margin);
        out += std::to_string(r.trial) + "," + std::to_string(r.seed) + "," +
               std::to_string(r.valid) + "," + join(r.rho) + "," + std::to_string(r.q1) + "," +
               std::to_string(r.transverse) + "," + std::to_string(r.verdict) + "," +
               std::to_string(r.design_success) + "," + std::to_string(r.probe_used) + "," +
               std::to_string(r.fail_ell) + "," + join(r.p_trace) + "," +
               std::to_string(r.verification_pass) + "," + margin + "," +
               std::to_string(r.theorem_violation) + "," + std::to_string(r.tolerance_marginal) + "\n";
    }
    return out;
}

std::string dump(const Json& j) {
    return j.dump(2) + "\n";
}

}  // namespace slasf::io
