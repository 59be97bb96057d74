#include "primwalk/report.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace primwalk {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a64(buf.str());
}

std::string digest_hex(std::uint64_t digest) {
    char out[17];
    std::snprintf(out, sizeof(out), "%016" PRIx64, digest);
    return out;
}

std::string FileHeader::render() const {
    std::ostringstream out;
    out << "# primwalk " << command << " v" << kVersion << "\n";
    out << "# config: " << config_json << "\n";
    out << "# seed: " << seed << "\n";
    if (!manifest.empty()) out << "# manifest: " << manifest << "\n";
    return out.str();
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string norm_histogram_csv(const FileHeader& header, const TrajectoryStats& stats) {
    std::ostringstream out;
    out << header.render();
    out << "norm_bin_lo,norm_bin_hi,count\n";
    for (const auto& [bin, count] : stats.norm_histogram) {
        const double lo = static_cast<double>(bin) * stats.bin_width;
        out << format_double(lo) << "," << format_double(lo + stats.bin_width) << "," << count
            << "\n";
    }
    return out.str();
}

std::string distribution_csv(const FileHeader& header, const EmpiricalDistribution& dist, int d) {
    std::ostringstream out;
    out << header.render();
    for (int i = 1; i <= d; ++i) out << "coord_" << i << ",";
    out << "probability\n";
    for (const auto& [point, count] : dist.counts) {
        for (Coord c : point) out << c << ",";
        out << format_double(static_cast<double>(count) / static_cast<double>(dist.total))
            << "\n";
    }
    return out.str();
}

std::string return_times_csv(const FileHeader& header, const ReturnStats& stats) {
    std::ostringstream out;
    out << header.render();
    out << "# completed: " << stats.completed << " censored: " << stats.censored
        << " cap: " << stats.cap << "\n";
    if (stats.tau_hat)
        out << "# tau_hat: " << format_double(*stats.tau_hat)
            << " se: " << format_double(stats.tau_se) << "\n";
    else
        out << "# tau_hat: undefined (no completed excursions)\n";
    out << "return_time,count\n";
    for (const auto& [len, count] : stats.completed_histogram)
        out << len << "," << count << "\n";
    return out.str();
}

std::string chernoff_csv(const FileHeader& header, const std::vector<ChernoffRow>& rows) {
    std::ostringstream out;
    out << header.render();
    out << "n,threshold,empirical_tail,bound,trials\n";
    for (const auto& row : rows) {
        out << row.n << "," << format_double(row.threshold) << ","
            << format_double(row.empirical_tail) << "," << format_double(row.bound) << ","
            << row.trials << "\n";
    }
    return out.str();
}

std::string chain_csv(const FileHeader& header, const TruncatedChain& chain) {
    std::ostringstream out;
    out << header.render();
    out << "state_id,";
    for (int i = 1; i <= chain.dim(); ++i) out << "coord_" << i << ",";
    out << "target_id,prob_num,prob_den\n";
    for (std::size_t s = 0; s < chain.states.size(); ++s) {
        for (const auto& [target, weight] : chain.rows[s]) {
            const Rational p = Rational::ratio(weight, chain.denom);
            out << s << ",";
            for (Coord c : chain.states[s]) out << c << ",";
            out << target << "," << Rational::int_to_string(p.num()) << ","
                << Rational::int_to_string(p.den()) << "\n";
        }
    }
    return out.str();
}

std::string stationary_csv(const FileHeader& header, const TruncatedChain& chain,
                           const StationaryResult& stationary) {
    std::ostringstream out;
    out << header.render();
    out << "# residual: " << format_double(static_cast<double>(stationary.residual))
        << " iterations: " << stationary.iterations << "\n";
    out << "state_id,";
    for (int i = 1; i <= chain.dim(); ++i) out << "coord_" << i << ",";
    out << "probability\n";
    for (std::size_t s = 0; s < chain.states.size(); ++s) {
        out << s << ",";
        for (Coord c : chain.states[s]) out << c << ",";
        out << format_double(static_cast<double>(stationary.pi[s])) << "\n";
    }
    return out.str();
}

std::string path_csv(const FileHeader& header, const StepSequence& steps) {
    std::ostringstream out;
    out << header.render();
    const int d = steps.empty() ? 0 : static_cast<int>(steps.front().size());
    out << "index,";
    for (int i = 1; i <= d; ++i) out << "step_" << i << ",";
    for (int i = 1; i <= d; ++i) out << "pos_" << i << (i == d ? "" : ",");
    out << "\n";
    if (d == 0) return out.str();
    const auto points = replay_path(steps, d);
    for (std::size_t i = 0; i < steps.size(); ++i) {
        out << (i + 1) << ",";
        for (Coord c : steps[i]) out << c << ",";
        for (int j = 0; j < d; ++j)
            out << points[i][static_cast<std::size_t>(j)] << (j + 1 == d ? "" : ",");
        out << "\n";
    }
    return out.str();
}

namespace {

json header_json(const FileHeader& header) {
    return json{{"command", header.command},
                {"config", json::parse(header.config_json)},
                {"seed", header.seed},
                {"version", kVersion}};
}

} // namespace

std::string drift_report_json(const FileHeader& header, const DriftReport& report) {
    json rows = json::array();
    for (const auto& row : report.rows) {
        json cells = json::array();
        for (const auto& cell : row.cells)
            cells.push_back({{"n", cell.n},
                             {"mean_norm", cell.mean},
                             {"ci_lo", cell.ci_lo},
                             {"ci_hi", cell.ci_hi}});
        rows.push_back({{"z", row.z},
                        {"norm", row.norm},
                        {"used_in_fit", row.large},
                        {"cells", std::move(cells)}});
    }
    json doc = header_json(header);
    doc["report"] = {{"contraction_found", report.contraction_found},
                     {"c_hat", report.c_hat},
                     {"m_hat", report.m_hat},
                     {"m_prime", report.m_prime},
                     {"n0_prime", report.n0_prime},
                     {"kappa", report.kappa},
                     {"norm", norm_name(report.norm)},
                     {"trials", report.trials},
                     {"rows", std::move(rows)},
                     // Convergence thresholds here are engineering choices,
                     // not values fixed by theory.
                     {"thresholds", "engineering-choice"}};
    return doc.dump(2) + "\n";
}

std::string recurrence_report_json(const FileHeader& header, const RecurrenceReport& report) {
    json masses = json::array();
    for (const auto& [n, mass] : report.mass_by_n) masses.push_back({{"n", n}, {"mass", mass}});
    json doc = header_json(header);
    doc["report"] = {{"epsilon", report.epsilon},
                     {"m_prime", report.m_prime},
                     {"radius", report.radius},
                     {"mass_by_n", std::move(masses)},
                     {"n_z", report.n_z ? json(*report.n_z) : json(nullptr)},
                     {"thresholds", "engineering-choice"}};
    return doc.dump(2) + "\n";
}

std::string kac_json(const FileHeader& header, const KacCheckResult& result) {
    json doc = header_json(header);
    doc["report"] = {{"omega_hat", result.omega_hat},
                     {"tau_hat", result.tau_hat},
                     {"ratio", result.ratio},
                     {"ci_lo", result.ci_lo},
                     {"ci_hi", result.ci_hi},
                     {"occupation_steps", result.occupation_steps},
                     {"excursions_completed", result.excursions_completed},
                     {"censored_fraction", result.censored_fraction}};
    return doc.dump(2) + "\n";
}

std::string torus_calibration_json(const FileHeader& header, const TorusCalibration& calibration) {
    json word = json::array();
    for (const auto& a : calibration.covering_word) word.push_back(a);
    json doc = header_json(header);
    doc["report"] = {
        {"k", calibration.k},
        {"n0", calibration.n0},
        {"covering_word", std::move(word)},
        {"cylinder_bound", calibration.cylinder_bound},
        {"cylinder_bound_exact", calibration.cylinder_bound_exact
                                     ? json(calibration.cylinder_bound_exact->str())
                                     : json(nullptr)},
        {"log_cylinder_bound", calibration.log_cylinder_bound},
        {"alpha_hat", calibration.alpha_hat},
        {"alpha_ci_lo", calibration.alpha_ci_lo},
        {"alpha_ci_hi", calibration.alpha_ci_hi},
        {"alpha_trials", calibration.alpha_trials}};
    return doc.dump(2) + "\n";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("short write to " + path.string());
}

std::string run_manifest_json(const FileHeader& header,
                              const std::vector<std::filesystem::path>& outputs) {
    json files = json::array();
    for (const auto& path : outputs) {
        files.push_back({{"path", path.string()},
                         {"bytes", std::filesystem::file_size(path)},
                         {"fnv1a64", digest_hex(fnv1a64_file(path))}});
    }
    json doc = header_json(header);
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    doc["outputs"] = std::move(files);
    doc["generated_at_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    return doc.dump(2) + "\n";
}

} // namespace primwalk
