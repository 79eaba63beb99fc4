#include "bodycorr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "bodycorr/io.hpp"

namespace bodycorr {

std::vector<double> match_errors(const CorrespondenceSet& matches,
                                 const std::vector<int>& true_target,
                                 const Eigen::Matrix<double, Eigen::Dynamic, 3>& target_positions,
                                 ErrorMetric metric, const TriMesh* target_mesh) {
    std::vector<double> errors;
    errors.reserve(matches.matches.size());

    std::map<int, Eigen::VectorXd> geodesic_cache;
    if (metric == ErrorMetric::Geodesic && target_mesh == nullptr) {
        throw std::invalid_argument("match_errors: geodesic metric needs the target mesh");
    }

    for (const Correspondence& c : matches.matches) {
        if (c.source_id < 0 || c.source_id >= static_cast<int>(true_target.size())) {
            throw std::invalid_argument("match_errors: missing ground truth for source " +
                                        std::to_string(c.source_id));
        }
        const int truth = true_target[static_cast<size_t>(c.source_id)];
        if (truth < 0) {
            throw std::invalid_argument("match_errors: missing ground truth for source " +
                                        std::to_string(c.source_id));
        }
        if (metric == ErrorMetric::Euclidean) {
            if (truth >= target_positions.rows() || c.target_id >= target_positions.rows()) {
                throw std::invalid_argument("match_errors: target id out of range");
            }
            errors.push_back(
                100.0 * (target_positions.row(truth) - target_positions.row(c.target_id)).norm());
        } else {
            auto it = geodesic_cache.find(truth);
            if (it == geodesic_cache.end()) {
                it = geodesic_cache.emplace(truth, geodesic_distances(*target_mesh, truth)).first;
            }
            errors.push_back(100.0 * it->second[c.target_id]);
        }
    }
    return errors;
}

ErrorReport summarize(const std::vector<std::vector<double>>& errors_per_pair,
                      const std::vector<double>& radii_cm) {
    if (errors_per_pair.empty()) throw std::invalid_argument("summarize: no pairs");
    ErrorReport report;
    report.radii_cm = radii_cm;

    double total = 0;
    size_t count = 0;
    double max_error = 0;
    for (const auto& errors : errors_per_pair) {
        if (errors.empty()) throw std::invalid_argument("summarize: empty error list");
        double pair_sum = 0;
        for (double e : errors) {
            pair_sum += e;
            max_error = std::max(max_error, e);
        }
        report.pair_ae.push_back(pair_sum / static_cast<double>(errors.size()));
        total += pair_sum;
        count += errors.size();
    }
    report.ae = total / static_cast<double>(count);
    report.worst_ae = *std::max_element(report.pair_ae.begin(), report.pair_ae.end());

    auto fraction_within = [&](double radius) {
        size_t within = 0;
        for (const auto& errors : errors_per_pair) {
            for (double e : errors) {
                if (e <= radius) ++within;
            }
        }
        return static_cast<double>(within) / static_cast<double>(count);
    };
    for (double r : radii_cm) report.recall.push_back(fraction_within(r));

    const int steps = static_cast<int>(std::ceil(max_error)) + 1;
    for (int r = 0; r <= steps; ++r) {
        report.cumulative.emplace_back(static_cast<double>(r), fraction_within(r));
    }
    return report;
}

void write_errors_csv(const std::vector<double>& errors_cm, const std::string& path) {
    std::ostringstream out;
    out << "match_index,error_cm\n";
    char buf[64];
    for (size_t i = 0; i < errors_cm.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.9e\n", i, errors_cm[i]);
        out << buf;
    }
    atomic_write_text(path, out.str());
}

void write_cumulative_csv(const ErrorReport& report, const std::string& path) {
    std::ostringstream out;
    out << "radius_cm,fraction\n";
    char buf[64];
    for (const auto& [radius, fraction] : report.cumulative) {
        std::snprintf(buf, sizeof(buf), "%.1f,%.9f\n", radius, fraction);
        out << buf;
    }
    atomic_write_text(path, out.str());
}

std::string report_summary_text(const ErrorReport& report) {
    std::ostringstream out;
    char buf[160];
    out << "pair            AE (cm)\n";
    for (size_t p = 0; p < report.pair_ae.size(); ++p) {
        std::snprintf(buf, sizeof(buf), "pair %-10zu %8.3f\n", p, report.pair_ae[p]);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "AE (all pairs)  %8.3f\nworst AE        %8.3f\n", report.ae,
                  report.worst_ae);
    out << buf;
    for (size_t r = 0; r < report.radii_cm.size(); ++r) {
        std::snprintf(buf, sizeof(buf), "recall@%-4.0fcm    %7.4f\n", report.radii_cm[r],
                      report.recall[r]);
        out << buf;
    }
    return out.str();
}

}  // namespace bodycorr
