#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tcqkd/harness.hpp"
#include "tcqkd/security.hpp"

namespace tcqkd {

// Parsing and file problems carry the offending file/line in the message.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Chronogram CSV: header `sequence_id,channel,timestamp_ns`, channel in
// {KEY, MZ_PLUS, MZ_MINUS}, timestamps printed with one decimal (0.1 ns).
void write_chronogram_csv(std::ostream& os, const std::vector<DetectionEvent>& events);
void write_chronogram_csv(const std::string& path, const std::vector<DetectionEvent>& events);
std::vector<DetectionEvent> read_chronogram_csv(const std::string& path);

// Truth CSV: header `sequence_id,clock_index,symbol`, symbol in {a,b,c,d}.
void write_truth_csv(std::ostream& os, const TruthRecord& truth);
void write_truth_csv(const std::string& path, const TruthRecord& truth);
TruthRecord read_truth_csv(const std::string& path);

// Contrast-sample CSV: header `sequence_id,n_plus,n_minus`.
void write_samples_csv(std::ostream& os, const std::vector<ContrastSample>& samples);
void write_samples_csv(const std::string& path, const std::vector<ContrastSample>& samples);
std::vector<ContrastSample> read_samples_csv(const std::string& path);

// Security curves: header `q,i_ab,i_ae,dc`, one block per curve.
void write_curves_csv(std::ostream& os, const std::vector<SecurityCurve>& curves);
void write_curves_csv(const std::string& path, const std::vector<SecurityCurve>& curves);

// Range projection: header `distance_km,expected_qber,secure`.
void write_range_csv(std::ostream& os, const RangeProjection& proj);
void write_range_csv(const std::string& path, const RangeProjection& proj);

// Flat `key = value` config file; '#' starts a comment; unknown keys are
// errors. Keys are documented in the README and the shipped configs.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config(std::istream& in, const std::string& origin);

std::string report_to_json(const RunReport& rep);
void write_report_json(const std::string& path, const RunReport& rep);

}  // namespace tcqkd
