#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "hus/harness.hpp"

namespace hus {

/// Parses and validates a JSON experiment document. Omitted keys take their defaults;
/// unknown keys are rejected. Throws ParseError (with line/column or the offending
/// field path) or ValidationError.
ExperimentConfig parse_config(const std::string& text);

/// Canonical JSON form: every key present, so it lists everything an override may touch.
nlohmann::json config_to_json(const ExperimentConfig& config);
std::string serialize_config(const ExperimentConfig& config);

/// Applies `key.path=value` overrides to a document. The value is read as JSON when it
/// parses, else as a string. Keys absent from the canonical form are rejected with ParseError.
std::string apply_overrides(const std::string& text, const std::vector<std::string>& overrides);

nlohmann::json summary_to_json(const CorrectionSummary& summary, const BoundCheck& check);
/// Mirrors VerificationReport field by field; wall_times only when requested, since they
/// differ run to run.
nlohmann::json report_to_json(const VerificationReport& report, bool include_timings = false);
std::string report_to_csv(const VerificationReport& report);

/// 17 significant digits: doubles survive a text round trip.
std::string format_double(double v);

/// Header x1..xn,re_1,im_1,...,re_m,im_m then one row per point.
void write_samples_csv(std::ostream& out, const std::vector<Point>& points,
                       const std::vector<Value>& values);

/// Writes to `path + ".tmp"` then renames over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace hus
