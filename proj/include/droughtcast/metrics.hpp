#pragma once

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <vector>

#include "droughtcast/core.hpp"
#include "droughtcast/csv.hpp"

namespace droughtcast {

/// Entry (i, j) counts rows with truth classes[i] predicted as classes[j].
inline std::vector<std::vector<std::size_t>> confusion_matrix(std::span<const int> truth,
                                                              std::span<const int> pred,
                                                              std::span<const int> classes) {
    if (truth.size() != pred.size())
        throw ParameterError("confusion_matrix: truth/pred length mismatch");
    std::vector<std::vector<std::size_t>> matrix(classes.size(),
                                                 std::vector<std::size_t>(classes.size(), 0));
    auto index_of = [&](int label) {
        for (std::size_t i = 0; i < classes.size(); ++i)
            if (classes[i] == label) return i;
        throw ParameterError("confusion_matrix: label " + std::to_string(label) +
                             " not in class list");
    };
    for (std::size_t i = 0; i < truth.size(); ++i)
        matrix[index_of(truth[i])][index_of(pred[i])]++;
    return matrix;
}

struct ClassRow {
    int label = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
    bool zero_division = false;  // a rate above had a zero denominator
};

struct ReportAverages {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Accuracy plus per-class precision/recall/F1/support with macro and
/// support-weighted averages. micro_f1 equals accuracy for single-label
/// classification and is reported alongside it.
struct ClassReport {
    double accuracy = 0.0;
    double micro_f1 = 0.0;
    std::vector<ClassRow> rows;
    ReportAverages macro;
    ReportAverages weighted;
    std::size_t total_support = 0;
};

/// Builds the report from a confusion matrix. Zero denominators yield a rate
/// of 0 with the row's zero_division flag set. Classes with zero support are
/// excluded from the macro average only when `present_only` is set.
inline ClassReport report_from_confusion(const std::vector<std::vector<std::size_t>>& matrix,
                                         std::span<const int> classes,
                                         bool present_only = false) {
    if (matrix.size() != classes.size()) throw ParameterError("confusion matrix size mismatch");
    ClassReport report;
    std::size_t total = 0;
    std::size_t diagonal = 0;

    for (std::size_t i = 0; i < classes.size(); ++i) {
        std::size_t tp = matrix[i][i];
        std::size_t fn = 0;
        std::size_t fp = 0;
        for (std::size_t j = 0; j < classes.size(); ++j) {
            total += matrix[i][j];
            if (j != i) {
                fn += matrix[i][j];
                fp += matrix[j][i];
            }
        }
        diagonal += tp;

        ClassRow row;
        row.label = classes[i];
        row.support = tp + fn;
        row.zero_division = (tp + fp == 0) || (tp + fn == 0);
        row.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        row.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
        row.f1 = row.precision + row.recall == 0.0
                     ? 0.0
                     : 2.0 * row.precision * row.recall / (row.precision + row.recall);
        report.rows.push_back(row);
    }

    report.total_support = total;
    report.accuracy = total == 0 ? 0.0 : static_cast<double>(diagonal) / static_cast<double>(total);
    report.micro_f1 = report.accuracy;

    std::size_t macro_count = 0;
    for (const auto& row : report.rows) {
        if (present_only && row.support == 0) continue;
        report.macro.precision += row.precision;
        report.macro.recall += row.recall;
        report.macro.f1 += row.f1;
        ++macro_count;
    }
    if (macro_count > 0) {
        report.macro.precision /= static_cast<double>(macro_count);
        report.macro.recall /= static_cast<double>(macro_count);
        report.macro.f1 /= static_cast<double>(macro_count);
    }
    if (total > 0) {
        for (const auto& row : report.rows) {
            const double w = static_cast<double>(row.support) / static_cast<double>(total);
            report.weighted.precision += w * row.precision;
            report.weighted.recall += w * row.recall;
            report.weighted.f1 += w * row.f1;
        }
    }
    return report;
}

inline ClassReport class_report(std::span<const int> truth, std::span<const int> pred,
                                std::span<const int> classes, bool present_only = false) {
    return report_from_confusion(confusion_matrix(truth, pred, classes), classes, present_only);
}

/// Fixed-width text table: accuracy at full precision up top, rates at two
/// decimals, one row per class, then blank accuracy row, macro and weighted
/// averages.
inline std::string render_report(const ClassReport& report, const std::string& title = "") {
    if (report.rows.empty()) throw ParameterError("render_report: empty report");
    std::ostringstream out;
    if (!title.empty()) out << title << '\n';
    out << "accuracy_score: " << format_double(report.accuracy) << '\n';
    out << "f1_score: " << format_double(report.micro_f1) << '\n';

    auto rate = [](double v) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(2) << v;
        return s.str();
    };
    auto line = [&](const std::string& name, const std::string& p, const std::string& r,
                    const std::string& f1, const std::string& support) {
        out << std::setw(12) << name << std::setw(11) << p << std::setw(10) << r << std::setw(10)
            << f1 << std::setw(10) << support << '\n';
    };

    line("", "precision", "recall", "f1-score", "support");
    out << '\n';
    for (const auto& row : report.rows)
        line(std::to_string(row.label), rate(row.precision), rate(row.recall), rate(row.f1),
             std::to_string(row.support));
    line("accuracy", "", "", "", "");
    line("macro avg", rate(report.macro.precision), rate(report.macro.recall),
         rate(report.macro.f1), std::to_string(report.total_support));
    line("weighted avg", rate(report.weighted.precision), rate(report.weighted.recall),
         rate(report.weighted.f1), std::to_string(report.total_support));
    return out.str();
}

/// Machine-readable export: one row per class plus accuracy/macro/weighted
/// summary rows.
inline void write_report_csv(std::ostream& out, const ClassReport& report) {
    std::vector<std::string> row = {"row", "precision", "recall", "f1", "support"};
    csv::write_row(out, row);
    for (const auto& r : report.rows) {
        row = {std::to_string(r.label), format_double(r.precision), format_double(r.recall),
               format_double(r.f1), std::to_string(r.support)};
        csv::write_row(out, row);
    }
    row = {"accuracy", "", "", format_double(report.accuracy),
           std::to_string(report.total_support)};
    csv::write_row(out, row);
    row = {"macro_avg", format_double(report.macro.precision), format_double(report.macro.recall),
           format_double(report.macro.f1), std::to_string(report.total_support)};
    csv::write_row(out, row);
    row = {"weighted_avg", format_double(report.weighted.precision),
           format_double(report.weighted.recall), format_double(report.weighted.f1),
           std::to_string(report.total_support)};
    csv::write_row(out, row);
}

}  // namespace droughtcast
