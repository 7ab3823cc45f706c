#include "gridloc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "gridloc/report.hpp"

namespace gridloc {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;

std::string escape(const std::string& text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string num(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << v;
    return os.str();
}

}  // namespace

void render_svg(std::ostream& out, const EvalReport& report, const std::string& title) {
    std::vector<double> xs;
    for (double a : axis_values(report)) {
        if (std::isfinite(a)) xs.push_back(a);
    }
    std::sort(xs.begin(), xs.end());

    const Variant series[] = {Variant::NoNeighbors, Variant::WithNeighbors};
    const char* colors[] = {"#d62728", "#1f77b4"};
    double lo = 100.0, hi = 0.0;
    for (Variant v : series) {
        for (double x : xs) {
            for (const auto& c : report.cells) {
                if (!c.failed && c.variant == v && c.fault_type == kAllTypes && axis_value(report.kind, c) == x) {
                    lo = std::min(lo, c.accuracy);
                    hi = std::max(hi, c.accuracy);
                }
            }
        }
    }
    if (lo > hi) lo = 0.0, hi = 100.0;
    lo = std::max(0.0, std::floor(lo / 10.0) * 10.0);
    hi = std::min(100.0, std::ceil(hi / 10.0) * 10.0);
    if (hi <= lo) hi = lo + 10.0;

    const double x0 = xs.empty() ? 0.0 : xs.front();
    const double x1 = xs.size() < 2 ? x0 + 1.0 : xs.back();
    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); };
    auto py = [&](double y) { return kHeight - kBottom - (y - lo) / (hi - lo) * (kHeight - kTop - kBottom); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
        << "</text>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << py(lo) << "\" x2=\"" << kWidth - kRight << "\" y2=\"" << py(lo)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << py(lo) << "\" x2=\"" << kLeft << "\" y2=\"" << py(hi)
        << "\" stroke=\"black\"/>\n";
    for (double y = lo; y <= hi + 1e-9; y += 10.0) {
        out << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(py(y) + 4) << "\" text-anchor=\"end\">" << num(y)
            << "</text>\n";
    }
    for (double x : xs) {
        out << "<text x=\"" << num(px(x)) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">"
            << format_number(x) << "</text>\n";
    }
    const char* xlabel = report.kind == SweepKind::Snr         ? "SNR (dB)"
                         : report.kind == SweepKind::TrainSize ? "train fraction"
                                                               : "observed bus fraction";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">" << xlabel
        << "</text>\n";
    out << "<text x=\"16\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 16 " << kHeight / 2
        << ")\" text-anchor=\"middle\">accuracy (%)</text>\n";

    for (int s = 0; s < 2; ++s) {
        std::ostringstream points;
        for (double x : xs) {
            double sum = 0.0;
            int count = 0;
            for (const auto& c : report.cells) {
                if (!c.failed && c.variant == series[s] && c.fault_type == kAllTypes &&
                    axis_value(report.kind, c) == x) {
                    sum += c.accuracy;
                    ++count;
                }
            }
            if (count == 0) continue;
            points << num(px(x)) << ',' << num(py(sum / count)) << ' ';
        }
        const std::string pts = points.str();
        if (pts.empty()) continue;
        out << "<polyline fill=\"none\" stroke=\"" << colors[s] << "\" stroke-width=\"2\" points=\"" << pts
            << "\"/>\n";
        out << "<text x=\"" << kWidth - kRight - 110 << "\" y=\"" << kTop + 16 * s << "\" fill=\"" << colors[s]
            << "\">" << to_string(series[s]) << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace gridloc
