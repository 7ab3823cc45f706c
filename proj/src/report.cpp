#include "gridloc/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace gridloc {

std::string format_number(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

double parse_number(const std::string& text) {
    if (text == "inf") return kNoNoise;
    if (text == "-inf") return -kNoNoise;
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw InputError("not a number: '" + text + "'");
    }
    return value;
}

void write_cells_csv(std::ostream& out, const EvalReport& report) {
    out << kCellHeader << '\n';
    for (const auto& c : report.cells) {
        out << to_string(report.kind) << ',' << to_string(c.variant) << ',' << c.fault_type << ','
            << format_number(c.observability) << ',' << format_number(c.train_fraction) << ','
            << format_number(c.snr_db) << ',' << c.seed << ',' << format_number(c.accuracy) << ',' << c.samples
            << ',' << (c.failed ? "failed" : "ok") << '\n';
    }
}

EvalReport read_cells_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCellHeader) throw InputError("cell table has an unexpected header");
    EvalReport report;
    bool first = true;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string field; std::getline(ss, field, ',');) f.push_back(field);
        if (f.size() != 10) throw InputError("cell table row " + std::to_string(row) + " has the wrong field count");
        const auto kind = parse_sweep_kind(f[0]);
        if (first) {
            report.kind = kind;
            first = false;
        } else if (kind != report.kind) {
            throw InputError("cell table mixes sweep kinds");
        }
        AccuracyCell c;
        c.variant = parse_variant(f[1]);
        c.fault_type = f[2];
        c.observability = parse_number(f[3]);
        c.train_fraction = parse_number(f[4]);
        c.snr_db = parse_number(f[5]);
        c.seed = std::stoull(f[6]);
        c.accuracy = parse_number(f[7]);
        c.samples = std::stoull(f[8]);
        if (f[9] != "ok" && f[9] != "failed") throw InputError("unknown cell status '" + f[9] + "'");
        c.failed = f[9] == "failed";
        report.cells.push_back(std::move(c));
    }
    return report;
}

EvalReport load_cells_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DependencyError("cannot open report " + path.string());
    return read_cells_csv(in);
}

double axis_value(SweepKind kind, const AccuracyCell& cell) {
    switch (kind) {
        case SweepKind::TrainSize:
            return cell.train_fraction;
        case SweepKind::Snr:
            return cell.snr_db;
        default:
            return cell.observability;
    }
}

std::vector<double> axis_values(const EvalReport& report) {
    std::vector<double> out;
    for (const auto& c : report.cells) {
        const double v = axis_value(report.kind, c);
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    return out;
}

namespace {

std::vector<std::string> fault_types(const EvalReport& report) {
    std::vector<std::string> out;
    for (const auto& c : report.cells) {
        if (c.failed) continue;
        if (std::find(out.begin(), out.end(), c.fault_type) == out.end()) out.push_back(c.fault_type);
    }
    return out;
}

std::vector<Variant> variants(const EvalReport& report) {
    std::vector<Variant> out;
    for (const auto& c : report.cells) {
        if (std::find(out.begin(), out.end(), c.variant) == out.end()) out.push_back(c.variant);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<double> mean_at(const EvalReport& report, Variant v, const std::string& type, double axis) {
    double sum = 0.0;
    int count = 0;
    for (const auto& c : report.cells) {
        if (c.failed || c.variant != v || c.fault_type != type || axis_value(report.kind, c) != axis) continue;
        sum += c.accuracy;
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / count;
}

std::string fixed2(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

}  // namespace

void write_pivot_csv(std::ostream& out, const EvalReport& report) {
    const auto axis = axis_values(report);
    out << "fault_type,variant";
    for (double a : axis) out << ',' << format_number(a);
    out << '\n';
    for (const auto& type : fault_types(report)) {
        for (Variant v : variants(report)) {
            out << type << ',' << to_string(v);
            for (double a : axis) {
                const auto m = mean_at(report, v, type, a);
                out << ',' << (m ? fixed2(*m) : "failed");
            }
            out << '\n';
        }
    }
}

std::string summary_json(const EvalReport& report) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["format"] = "gridloc-summary";
    j["version"] = 1;
    j["sweep"] = to_string(report.kind);
    std::size_t failed = 0;
    for (const auto& c : report.cells) failed += c.failed;
    j["cells"] = report.cells.size();
    j["failed_cells"] = failed;
    ordered_json means = ordered_json::object();
    const auto axis = axis_values(report);
    for (Variant v : variants(report)) {
        ordered_json per_type = ordered_json::object();
        for (const auto& type : fault_types(report)) {
            ordered_json row = ordered_json::object();
            for (double a : axis) {
                const auto m = mean_at(report, v, type, a);
                row[format_number(a)] = m ? ordered_json(*m) : ordered_json(nullptr);
            }
            per_type[type] = row;
        }
        means[to_string(v)] = per_type;
    }
    j["mean_accuracy"] = means;
    if (!report.tuned_epsilon.empty()) {
        ordered_json eps = ordered_json::object();
        for (const auto& [snr, e] : report.tuned_epsilon) eps[format_number(snr)] = e;
        j["tuned_epsilon"] = eps;
    }
    if (report.kind == SweepKind::Observability) {
        ordered_json deg = ordered_json::object();
        for (Variant v : variants(report)) {
            const auto d = mean_degradation(report, v);
            deg[to_string(v)] = d ? ordered_json(*d) : ordered_json(nullptr);
        }
        j["mean_degradation"] = deg;
    }
    if (report.significance) {
        const auto& s = *report.significance;
        j["significance"] = {{"test", "mann_whitney_u"},
                             {"alternative", "greater"},
                             {"sample_a", s.label_a},
                             {"sample_b", s.label_b},
                             {"n_a", s.count_a},
                             {"n_b", s.count_b},
                             {"rank_sum_a", s.test.rank_sum_a},
                             {"rank_sum_b", s.test.rank_sum_b},
                             {"u1", s.test.u1},
                             {"u2", s.test.u2},
                             {"u", s.test.u},
                             {"z", s.test.z},
                             {"p_value", s.test.p_value},
                             {"alpha", s.alpha},
                             {"reject", s.test.reject}};
    }
    return j.dump(2) + "\n";
}

void save_report(const std::filesystem::path& dir, const EvalReport& report) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "cells.csv", std::ios::binary);
        write_cells_csv(out, report);
    }
    {
        std::ofstream out(dir / "table.csv", std::ios::binary);
        write_pivot_csv(out, report);
    }
    std::ofstream out(dir / "summary.json", std::ios::binary);
    out << summary_json(report);
    if (!out) throw InputError("cannot write report to " + dir.string());
}

}  // namespace gridloc
