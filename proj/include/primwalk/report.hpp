#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "primwalk/oracle.hpp"
#include "primwalk/torus.hpp"
#include "primwalk/walk.hpp"

namespace primwalk {

inline constexpr const char* kVersion = "1.0.0";

/// FNV-1a 64-bit digest, used to fingerprint output files.
std::uint64_t fnv1a64(std::string_view data);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string digest_hex(std::uint64_t digest);

/// Header block stamped at the top of every output file.
struct FileHeader {
    std::string command;
    std::string config_json; // compact echo of the merged config
    std::uint64_t seed = 0;
    std::string manifest;    // filename of the run manifest, when one is written

    std::string render() const;
};

std::string format_double(double v);

// CSV renderers. Every file starts with the header block, then one column
// header row, then the data rows.
std::string norm_histogram_csv(const FileHeader& header, const TrajectoryStats& stats);
std::string distribution_csv(const FileHeader& header, const EmpiricalDistribution& dist, int d);
std::string return_times_csv(const FileHeader& header, const ReturnStats& stats);
std::string chernoff_csv(const FileHeader& header, const std::vector<ChernoffRow>& rows);
std::string chain_csv(const FileHeader& header, const TruncatedChain& chain);
std::string stationary_csv(const FileHeader& header, const TruncatedChain& chain,
                           const StationaryResult& stationary);
std::string path_csv(const FileHeader& header, const StepSequence& steps);

// JSON renderers (pretty-printed, trailing newline).
std::string drift_report_json(const FileHeader& header, const DriftReport& report);
std::string recurrence_report_json(const FileHeader& header, const RecurrenceReport& report);
std::string kac_json(const FileHeader& header, const KacCheckResult& result);
std::string torus_calibration_json(const FileHeader& header, const TorusCalibration& calibration);

void write_file(const std::filesystem::path& path, const std::string& content);

/// Manifest describing one CLI run: command, config echo, seed, library
/// version and the digests of every output file. The timestamp lives only
/// here, never in the outputs, so reruns are byte-identical.
std::string run_manifest_json(const FileHeader& header,
                              const std::vector<std::filesystem::path>& outputs);

} // namespace primwalk
