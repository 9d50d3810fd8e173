#pragma once

#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "chestnet/metrics/confusion.hpp"

namespace chestnet::metrics {

// One evaluation run, table-row shaped: model, epochs, accuracy, wall time,
// with the full confusion matrix behind it.
struct EvalReport {
    std::string model;
    int epochs = 0;
    std::uint64_t seed = 0;
    double accuracy = 0.0; // fraction in [0,1]
    double wall_seconds = 0.0;
    ConfusionMatrix cm;
};

enum class ReportFormat { json, csv, markdown };

inline ReportFormat report_format_from_string(const std::string& s) {
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    if (s == "md" || s == "markdown") return ReportFormat::markdown;
    throw ValueError("unsupported report format '" + s + "' (expected json|csv|md)");
}

// Accuracy rendered the way the result tables print it: percent, 2 decimals.
inline std::string percent_string(double fraction) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << fraction * 100.0 << "%";
    return os.str();
}

inline std::string seconds_string(double s) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << s;
    return os.str();
}

inline nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["model"] = r.model;
    j["epochs"] = r.epochs;
    j["seed"] = r.seed;
    j["accuracy"] = r.accuracy;
    j["accuracy_percent"] = percent_string(r.accuracy);
    j["wall_seconds"] = r.wall_seconds;
    j["classes"] = r.cm.class_names();
    auto rows = nlohmann::json::array();
    for (std::size_t t = 0; t < r.cm.classes(); ++t) {
        auto row = nlohmann::json::array();
        for (std::size_t p = 0; p < r.cm.classes(); ++p) row.push_back(r.cm.cell(t, p));
        rows.push_back(row);
    }
    j["confusion"] = rows;
    auto per_class = nlohmann::json::array();
    for (std::size_t c = 0; c < r.cm.classes(); ++c) {
        const ClassCounts cc = class_counts(r.cm, c);
        per_class.push_back({{"class", r.cm.class_names().empty()
                                           ? "class_" + std::to_string(c)
                                           : r.cm.class_names()[c]},
                             {"tp", cc.tp},
                             {"tn", cc.tn},
                             {"fp", cc.fp},
                             {"fn", cc.fn},
                             {"precision", precision(cc)},
                             {"recall", recall(cc)},
                             {"f1", f1(cc)}});
    }
    j["per_class"] = per_class;
    return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.model = j.at("model").get<std::string>();
    r.epochs = j.at("epochs").get<int>();
    r.seed = j.value("seed", std::uint64_t{0});
    r.accuracy = j.at("accuracy").get<double>();
    r.wall_seconds = j.value("wall_seconds", 0.0);
    const auto names = j.value("classes", std::vector<std::string>{});
    const auto rows = j.at("confusion");
    ConfusionMatrix cm(rows.size(), names);
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t p = 0; p < rows.size(); ++p)
            cm.cell(t, p) = rows[t][p].get<std::uint64_t>();
    r.cm = cm;
    return r;
}

// One row per run; stable column order: model, epochs, accuracy, wall time.
inline std::string emit_report(std::span<const EvalReport> reports, ReportFormat format) {
    if (reports.empty()) throw ValueError("emit_report: no reports to render");
    std::ostringstream os;
    switch (format) {
        case ReportFormat::json: {
            auto arr = nlohmann::json::array();
            for (const EvalReport& r : reports) arr.push_back(report_to_json(r));
            os << arr.dump(2) << "\n";
            break;
        }
        case ReportFormat::csv: {
            os << "model,epochs,accuracy_percent,wall_seconds\n";
            for (const EvalReport& r : reports)
                os << r.model << "," << r.epochs << "," << percent_string(r.accuracy) << ","
                   << seconds_string(r.wall_seconds) << "\n";
            break;
        }
        case ReportFormat::markdown: {
            os << "| Model | Epochs | Accuracy | Time (s) |\n";
            os << "|-------|--------|----------|----------|\n";
            for (const EvalReport& r : reports)
                os << "| " << r.model << " | " << r.epochs << " | " << percent_string(r.accuracy)
                   << " | " << seconds_string(r.wall_seconds) << " |\n";
            break;
        }
    }
    return os.str();
}

} // namespace chestnet::metrics
