#include "slasf/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "slasf/seeds.hpp"

namespace slasf {

namespace {

double spectral_radius(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::EigenSolver<Matrix> es(a, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Largest distance between two sorted real multisets.
double multiset_distance(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size()) return std::numeric_limits<double>::infinity();
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    double err = 0.0;
    for (size_t k = 0; k < x.size(); ++k) err = std::max(err, std::abs(x[k] - y[k]));
    return err;
}

// Eigenvalues of a real matrix paired with a real target multiset: the complex spectrum is
// sorted by real part and compared entrywise, imaginary parts counting as error.
double eigensolver_distance(const Matrix& a, std::vector<double> target) {
    Eigen::EigenSolver<Matrix> es(a, false);
    std::vector<std::complex<double>> ev(es.eigenvalues().data(),
                                         es.eigenvalues().data() + es.eigenvalues().size());
    if (ev.size() != target.size()) return std::numeric_limits<double>::infinity();
    std::sort(ev.begin(), ev.end(), [](auto l, auto r) { return l.real() < r.real(); });
    std::sort(target.begin(), target.end());
    double err = 0.0;
    for (size_t k = 0; k < ev.size(); ++k) err = std::max(err, std::abs(ev[k] - target[k]));
    return err;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

double Cqlf::value(const Vector& x) const {
    return (weights.cwiseSqrt().asDiagonal() * (t.transpose() * x)).squaredNorm();
}

Cqlf construct_cqlf(const std::vector<Matrix>& a_cl, const Matrix& t, const TolerancePolicy& pol) {
    (void)pol;
    if (a_cl.empty()) throw DimensionError("construct_cqlf: no matrices");
    const Eigen::Index n = t.rows();
    if (t.cols() != n) throw DimensionError("construct_cqlf: T must be square");
    std::vector<Matrix> frame;
    for (const auto& a : a_cl) {
        if (a.rows() != n || a.cols() != n) throw DimensionError("construct_cqlf: shape mismatch");
        frame.push_back(t.transpose() * a * t);
    }
    constexpr double kContractionFloor = 1e-10;
    double best = -std::numeric_limits<double>::infinity();

    const auto attempt = [&](const Vector& w, double delta, bool adaptive) -> std::optional<Cqlf> {
        const Vector s = w.cwiseSqrt();
        const Vector s_inv = s.cwiseInverse();
        double worst = 0.0;
        for (const auto& tri : frame) {
            const Matrix c = s.asDiagonal() * tri * s_inv.asDiagonal();
            Eigen::JacobiSVD<Matrix> svd(c);
            worst = std::max(worst, svd.singularValues()(0));
        }
        const double contraction = 1.0 - worst * worst;
        const double margin = contraction * w.minCoeff();
        best = std::max(best, margin);
        if (!(contraction > kContractionFloor)) return std::nullopt;
        Cqlf out;
        const Matrix p = t * w.asDiagonal() * t.transpose();
        out.p = 0.5 * (p + p.transpose());
        out.t = t;
        out.weights = w;
        out.delta = delta;
        out.adaptive = adaptive;
        out.contraction = contraction;
        out.margin = margin;
        return out;
    };

    double delta = 1.0;
    for (int e = 0; e <= 12; ++e, delta /= 10.0) {
        Vector w(n);
        for (Eigen::Index k = 0; k < n; ++k) w(k) = std::pow(delta, static_cast<double>(n - 1 - k));
        if (auto c = attempt(w, delta, false)) return *c;
    }

    // A single large coupling drags every ratio of a geometric ladder down with it, and steep
    // ladders amplify the rounding left below the diagonal. Size each step from its own row
    // instead: scaled couplings are held at eta and the weights stay nonincreasing upwards.
    double radius = 0.0;
    for (const auto& tri : frame) radius = std::max(radius, tri.diagonal().cwiseAbs().maxCoeff());
    if (radius < 1.0 && n > 1) {
        double eta = (1.0 - radius) / static_cast<double>(n - 1);
        for (int h = 0; h < 30; ++h, eta /= 2.0) {
            Vector s = Vector::Ones(n);
            for (Eigen::Index k = n - 2; k >= 0; --k) {
                double sk = s(k + 1);
                for (const auto& tri : frame) {
                    for (Eigen::Index j = k + 1; j < n; ++j) {
                        const double c = std::abs(tri(k, j));
                        if (c > 0.0) sk = std::min(sk, eta * s(j) / c);
                    }
                }
                s(k) = sk;
            }
            if (!(s.minCoeff() > 0.0)) break;
            if (auto c = attempt(s.cwiseAbs2(), 0.0, true)) return *c;
        }
    }
    throw CqlfNotFound("no common quadratic Lyapunov function found (best margin " + fmt(best) + ")",
                       best);
}

double triangularity_residual(const Matrix& a, const Matrix& t) {
    const Matrix tri = t.transpose() * a * t;
    double mass = 0.0;
    for (Eigen::Index c = 0; c < tri.cols(); ++c) {
        for (Eigen::Index r = c + 1; r < tri.rows(); ++r) mass += tri(r, c) * tri(r, c);
    }
    return std::sqrt(mass) / (1.0 + a.norm());
}

VerificationReport verify_design(const SwitchedSystem& sys, const FeedbackDesign& design,
                                 const TolerancePolicy& pol, const VerifyThresholds& thr) {
    VerificationReport rep;
    const Eigen::Index n = sys.n();
    const int count = sys.count();
    std::vector<Matrix> a_cl;
    try {
        a_cl = closed_loop(sys, design);
    } catch (const DimensionError& e) {
        rep.failures.emplace_back(e.what());
        return rep;
    }
    const Matrix& t = design.transformation;
    const bool t_ok = t.rows() == n && t.cols() == n;
    const bool lambda_ok =
        design.assigned_eigenvalues.rows() == n && design.assigned_eigenvalues.cols() == count;
    if (!t_ok) rep.failures.emplace_back("transformation has wrong shape");
    if (!lambda_ok) rep.failures.emplace_back("assigned_eigenvalues has wrong shape");

    bool stable = true;
    for (int i = 0; i < count; ++i) {
        const double r = spectral_radius(a_cl[static_cast<size_t>(i)]);
        rep.spectral_radii.push_back(r);
        if (!(r < 1.0)) {
            stable = false;
            rep.failures.push_back("subsystem " + std::to_string(i + 1) + ": spectral radius " +
                                   fmt(r) + " >= 1");
        }
    }
    if (!t_ok || !lambda_ok) return rep;

    rep.orthogonality_defect = (t.transpose() * t - Matrix::Identity(n, n)).norm();
    for (int i = 0; i < count; ++i) {
        const Matrix& a = a_cl[static_cast<size_t>(i)];
        rep.triangularity_residual = std::max(rep.triangularity_residual, triangularity_residual(a, t));
        const Matrix tri = t.transpose() * a * t;
        std::vector<double> target(static_cast<size_t>(n));
        std::vector<double> diag(static_cast<size_t>(n));
        for (Eigen::Index k = 0; k < n; ++k) {
            target[static_cast<size_t>(k)] = design.assigned_eigenvalues(k, i);
            diag[static_cast<size_t>(k)] = tri(k, k);
        }
        rep.eigenvalue_match_error = std::max(rep.eigenvalue_match_error, multiset_distance(diag, target));
        rep.eigensolver_match_error = std::max(rep.eigensolver_match_error, eigensolver_distance(a, target));
    }
    const bool orthogonal = rep.orthogonality_defect <= pol.residual_tol;
    if (!orthogonal) {
        rep.failures.push_back("transformation is not orthogonal (defect " + fmt(rep.orthogonality_defect) + ")");
    }
    const bool triangular = rep.triangularity_residual <= thr.triangularity;
    if (!triangular) {
        rep.failures.push_back("triangularity residual " + fmt(rep.triangularity_residual) +
                               " exceeds " + fmt(thr.triangularity));
    }
    const bool eig_ok = rep.eigenvalue_match_error <= thr.eigenvalue_match;
    if (!eig_ok) {
        rep.failures.push_back("eigenvalue match error " + fmt(rep.eigenvalue_match_error) +
                               " exceeds " + fmt(thr.eigenvalue_match));
    }

    bool cqlf_ok = false;
    try {
        Cqlf c = construct_cqlf(a_cl, t, pol);
        rep.cqlf = std::move(c.p);
        rep.cqlf_delta = c.delta;
        rep.cqlf_adaptive = c.adaptive;
        rep.cqlf_margin = c.margin;
        rep.cqlf_contraction = c.contraction;
        cqlf_ok = c.margin > 0.0;
    } catch (const CqlfNotFound& e) {
        rep.cqlf_margin = e.best_margin();
        rep.failures.emplace_back(e.what());
    }
    rep.pass = stable && orthogonal && triangular && eig_ok && cqlf_ok;
    return rep;
}

SwitchingSignal SwitchingSignal::fixed(int index, int steps) {
    SwitchingSignal s;
    s.mode = Mode::fixed;
    s.sequence.assign(static_cast<size_t>(std::max(steps, 0)), index);
    return s;
}

SwitchingSignal SwitchingSignal::uniform_random(int count, int steps, std::uint64_t seed) {
    if (count < 1) throw ValidationError("uniform_random: need at least one subsystem");
    SwitchingSignal s;
    s.mode = Mode::uniform_random;
    s.seed = seed;
    std::mt19937_64 rng(derive_seed(seed, 0));
    std::uniform_int_distribution<int> pick(1, count);
    for (int k = 0; k < steps; ++k) s.sequence.push_back(pick(rng));
    return s;
}

SwitchingSignal SwitchingSignal::round_robin(int count, int steps) {
    if (count < 1) throw ValidationError("round_robin: need at least one subsystem");
    SwitchingSignal s;
    s.mode = Mode::round_robin;
    for (int k = 0; k < steps; ++k) s.sequence.push_back(k % count + 1);
    return s;
}

SwitchingSignal SwitchingSignal::custom(std::vector<int> sequence) {
    SwitchingSignal s;
    s.mode = Mode::custom;
    s.sequence = std::move(sequence);
    return s;
}

std::string mode_name(SwitchingSignal::Mode mode) {
    switch (mode) {
        case SwitchingSignal::Mode::fixed: return "fixed";
        case SwitchingSignal::Mode::uniform_random: return "uniform-random";
        case SwitchingSignal::Mode::round_robin: return "round-robin";
        case SwitchingSignal::Mode::custom: return "custom";
    }
    return "custom";
}

Trajectory simulate(const SwitchedSystem& sys, const FeedbackDesign& design,
                    const SwitchingSignal& signal, const Vector& x0, int steps,
                    const TolerancePolicy& pol) {
    if (steps < 0) throw ValidationError("simulate: negative step count");
    if (x0.size() != sys.n()) throw DimensionError("simulate: x0 has the wrong length");
    if (static_cast<int>(signal.sequence.size()) < steps) {
        throw ValidationError("simulate: switching signal shorter than the step count");
    }
    for (int k = 0; k < steps; ++k) {
        const int i = signal.sequence[static_cast<size_t>(k)];
        if (i < 1 || i > sys.count()) {
            throw ValidationError("simulate: switching index " + std::to_string(i) + " at step " +
                                  std::to_string(k) + " out of range 1.." + std::to_string(sys.count()));
        }
    }
    const std::vector<Matrix> a_cl = closed_loop(sys, design);

    Trajectory traj;
    try {
        traj.cqlf = construct_cqlf(a_cl, design.transformation, pol);
    } catch (const Error&) {
    }
    traj.states.reserve(static_cast<size_t>(steps) + 1);
    traj.states.push_back(x0);
    for (int k = 0; k < steps; ++k) {
        const auto i = static_cast<size_t>(signal.sequence[static_cast<size_t>(k)] - 1);
        const Vector& x = traj.states.back();
        traj.switching.push_back(static_cast<int>(i) + 1);
        traj.controls.push_back(design.gains[i] * x);
        traj.states.push_back(a_cl[i] * x);
    }
    if (traj.cqlf) {
        for (const auto& x : traj.states) traj.lyapunov.push_back(traj.cqlf->value(x));
    }
    return traj;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream out;
    const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
    out << "k,i_k";
    for (Eigen::Index j = 1; j <= n; ++j) out << ",x_" << j;
    out << ",V\n";
    char buf[40];
    for (size_t k = 0; k < traj.states.size(); ++k) {
        out << k << ',';
        if (k < traj.switching.size()) out << traj.switching[k];
        for (Eigen::Index j = 0; j < n; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", traj.states[k](j));
            out << ',' << buf;
        }
        out << ',';
        if (k < traj.lyapunov.size()) {
            std::snprintf(buf, sizeof buf, "%.17g", traj.lyapunov[k]);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace slasf
