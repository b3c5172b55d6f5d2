#include "slasf/model.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <utility>

#include "slasf/serialize.hpp"

namespace slasf {

namespace {

std::string label(const char* name, int i) {
    return std::string(name) + "_" + std::to_string(i);
}

// Dimension of the reachable subspace of (A, B), grown with orthonormal bases so that
// powers of A never enter a rank decision.
Eigen::Index reachable_dim(const Matrix& a, const Matrix& b, const TolerancePolicy& pol) {
    SubspaceBasis reach = image_basis(b, pol);
    for (Eigen::Index k = 0; k < a.rows(); ++k) {
        const SubspaceBasis next = sum(reach, image_basis(a * reach.basis(), pol, a.norm()), pol);
        if (next.dim() == reach.dim()) break;
        reach = next;
    }
    return reach.dim();
}

}  // namespace

SwitchedSystem::SwitchedSystem(std::vector<Subsystem> subsystems, const TolerancePolicy& pol)
    : subsystems_(std::move(subsystems)) {
    pol.validate();
    if (subsystems_.empty()) throw ValidationError("system has no subsystems");
    n_ = subsystems_.front().a.rows();
    if (n_ < 1) throw ValidationError("state dimension must be positive", 1);
    for (size_t k = 0; k < subsystems_.size(); ++k) {
        const int i = static_cast<int>(k) + 1;
        const Subsystem& s = subsystems_[k];
        if (s.a.rows() != n_ || s.a.cols() != n_) {
            throw ValidationError("dimension mismatch: " + label("A", i) + " is " +
                                      std::to_string(s.a.rows()) + "x" +
                                      std::to_string(s.a.cols()) + ", expected " +
                                      std::to_string(n_) + "x" + std::to_string(n_),
                                  i);
        }
        if (s.b.rows() != n_) {
            throw ValidationError("dimension mismatch: " + label("B", i) + " has " +
                                      std::to_string(s.b.rows()) + " rows, expected " +
                                      std::to_string(n_),
                                  i);
        }
        if (s.b.cols() < 1 || s.b.cols() > n_) {
            throw ValidationError("dimension mismatch: " + label("B", i) + " has " +
                                      std::to_string(s.b.cols()) + " columns, expected 1.." +
                                      std::to_string(n_),
                                  i);
        }
        if (!s.a.allFinite() || !s.b.allFinite()) {
            throw ValidationError(label("A", i) + "/" + label("B", i) + " contain non-finite entries",
                                  i);
        }
        if (numeric_rank(s.b, pol) != s.b.cols()) {
            throw ValidationError(label("B", i) + " rank-deficient", i);
        }
        if (reachable_dim(s.a, s.b, pol) != n_) {
            throw ValidationError("pair (" + label("A", i) + ", " + label("B", i) +
                                      ") is not controllable",
                                  i);
        }
    }
}

std::vector<Eigen::Index> SwitchedSystem::input_dims() const {
    std::vector<Eigen::Index> m;
    m.reserve(subsystems_.size());
    for (const auto& s : subsystems_) m.push_back(s.b.cols());
    return m;
}

Matrix controllability_matrix(const Matrix& a, const Matrix& b) {
    const Eigen::Index n = a.rows();
    Matrix c(n, n * b.cols());
    Matrix block = b;
    for (Eigen::Index k = 0; k < n; ++k) {
        c.middleCols(k * b.cols(), b.cols()) = block;
        block = a * block;
    }
    return c;
}

std::vector<Matrix> closed_loop(const SwitchedSystem& sys, const FeedbackDesign& design) {
    if (static_cast<int>(design.gains.size()) != sys.count()) {
        throw DimensionError("closed_loop: design has " + std::to_string(design.gains.size()) +
                             " gains for " + std::to_string(sys.count()) + " subsystems");
    }
    std::vector<Matrix> result;
    result.reserve(design.gains.size());
    for (int i = 0; i < sys.count(); ++i) {
        const Subsystem& s = sys[i];
        const Matrix& k = design.gains[static_cast<size_t>(i)];
        if (k.rows() != s.b.cols() || k.cols() != sys.n()) {
            throw DimensionError("closed_loop: " + label("K", i + 1) + " is " +
                                 std::to_string(k.rows()) + "x" + std::to_string(k.cols()) +
                                 ", expected " + std::to_string(s.b.cols()) + "x" +
                                 std::to_string(sys.n()));
        }
        result.push_back(s.a + s.b * k);
    }
    return result;
}

SwitchedSystem load_system(std::istream& in, const TolerancePolicy& pol) {
    io::Json j;
    try {
        j = io::Json::parse(in);
    } catch (const io::Json::parse_error& e) {
        throw ValidationError(std::string("parse failure: ") + e.what());
    }
    if (!j.is_object() || !j.contains("subsystems") || !j["subsystems"].is_array()) {
        throw ValidationError("parse failure: expected an object with a \"subsystems\" array");
    }
    std::vector<Subsystem> subsystems;
    int i = 0;
    for (const auto& entry : j["subsystems"]) {
        ++i;
        if (!entry.is_object() || !entry.contains("A") || !entry.contains("B")) {
            throw ValidationError("parse failure: subsystem " + std::to_string(i) +
                                      " needs \"A\" and \"B\"",
                                  i);
        }
        try {
            subsystems.push_back({io::matrix_from_json(entry["A"], label("A", i)),
                                  io::matrix_from_json(entry["B"], label("B", i))});
        } catch (const ValidationError& e) {
            throw ValidationError(e.what(), i);
        }
    }
    if (j.contains("n")) {
        if (!j["n"].is_number_integer()) throw ValidationError("parse failure: \"n\" must be an integer");
        const auto n = j["n"].get<long long>();
        for (size_t k = 0; k < subsystems.size(); ++k) {
            if (subsystems[k].a.rows() != n) {
                throw ValidationError("dimension mismatch: " + label("A", static_cast<int>(k) + 1) +
                                          " does not have n = " + std::to_string(n) + " rows",
                                      static_cast<int>(k) + 1);
            }
        }
    }
    return SwitchedSystem(std::move(subsystems), pol);
}

SwitchedSystem load_system_file(const std::string& path, const TolerancePolicy& pol) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open system file '" + path + "'");
    return load_system(in, pol);
}

void save_system(std::ostream& out, const SwitchedSystem& sys) {
    out << io::dump(io::system_to_json(sys));
}

FeedbackDesign load_design(std::istream& in) {
    io::Json j;
    try {
        j = io::Json::parse(in);
    } catch (const io::Json::parse_error& e) {
        throw ValidationError(std::string("parse failure: ") + e.what());
    }
    if (!j.is_object() || !j.contains("gains") || !j.contains("transformation") ||
        !j.contains("assigned_eigenvalues")) {
        throw ValidationError(
            "parse failure: design needs \"gains\", \"transformation\", \"assigned_eigenvalues\"");
    }
    FeedbackDesign d;
    int i = 0;
    for (const auto& g : j["gains"]) d.gains.push_back(io::matrix_from_json(g, label("K", ++i)));
    d.transformation = io::matrix_from_json(j["transformation"], "transformation");
    d.assigned_eigenvalues = io::matrix_from_json(j["assigned_eigenvalues"], "assigned_eigenvalues");
    return d;
}

FeedbackDesign load_design_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open design file '" + path + "'");
    return load_design(in);
}

void save_design(std::ostream& out, const FeedbackDesign& design) {
    out << io::dump(io::design_to_json(design));
}

}  // namespace slasf
