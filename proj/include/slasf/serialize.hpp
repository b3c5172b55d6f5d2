#pragma once

#include <json.hpp>

#include "slasf/linalg.hpp"
#include "slasf/model.hpp"
#include "slasf/montecarlo.hpp"
#include "slasf/structural.hpp"
#include "slasf/triangularize.hpp"
#include "slasf/verify.hpp"

namespace slasf::io {

using Json = nlohmann::json;

// Row-major list of lists. Empty matrices serialize as [] (row count is lost).
Json matrix_to_json(const Matrix& m);
// `context` prefixes error messages.
Matrix matrix_from_json(const Json& j, const std::string& context);

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, const std::string& context);

Json system_to_json(const SwitchedSystem& sys);
Json design_to_json(const FeedbackDesign& design);
Json record_to_json(const IterationRecord& rec);
Json trace_to_json(const std::vector<IterationRecord>& records);

Json genericity_to_json(const GenericityReport& rep);
Json verification_to_json(const VerificationReport& rep);
Json trajectory_to_json(const Trajectory& traj, const SwitchingSignal& signal);
Json experiment_spec_to_json(const ExperimentSpec& spec);
Json summary_to_json(const ExperimentSpec& spec, const ExperimentSummary& summary);
std::string trial_rows_csv(const ExperimentSummary& summary);

// Stable text form used for every file the tools write: two-space indent, trailing newline.
std::string dump(const Json& j);

}  // namespace slasf::io
