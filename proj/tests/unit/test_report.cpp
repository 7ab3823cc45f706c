#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "gridloc/checkpoint.hpp"
#include "gridloc/plot.hpp"
#include "gridloc/report.hpp"
#include "support.hpp"

using namespace gridloc;

namespace {

EvalReport sample_report() {
    EvalReport r;
    r.kind = SweepKind::Observability;
    for (double obs : {1.0, 0.3}) {
        for (Variant v : {Variant::NoNeighbors, Variant::WithNeighbors}) {
            for (std::uint64_t seed : {0u, 1u}) {
                for (const char* type : {"ALL", "TP"}) {
                    AccuracyCell c;
                    c.variant = v;
                    c.fault_type = type;
                    c.observability = obs;
                    c.seed = seed;
                    c.accuracy = 100.0 * obs - static_cast<double>(seed) - (v == Variant::NoNeighbors ? 1.0 : 0.0);
                    c.samples = 10 + seed;
                    r.cells.push_back(c);
                }
            }
        }
    }
    AccuracyCell bad;
    bad.observability = 0.2;
    bad.failed = true;
    bad.error = "singular";
    r.cells.push_back(bad);
    return r;
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("gridloc_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("number formatting round trips") {
    for (double v : {0.0, 1.0, 0.1, 56.789, 1e-12, 123456.75, kNoNoise}) CHECK(parse_number(format_number(v)) == v);
    CHECK(format_number(kNoNoise) == "inf");
    CHECK(format_number(0.25) == "0.25");
    CHECK_THROWS_AS(parse_number("abc"), InputError);
}

TEST_CASE("cell table round trip") {
    const auto r = sample_report();
    std::ostringstream out;
    write_cells_csv(out, r);
    CHECK(out.str().rfind(std::string(kCellHeader) + "\n", 0) == 0);
    std::istringstream in(out.str());
    const auto back = read_cells_csv(in);
    CHECK(back.kind == r.kind);
    REQUIRE(back.cells.size() == r.cells.size());
    for (std::size_t i = 0; i < r.cells.size(); ++i) {
        CHECK(back.cells[i].accuracy == r.cells[i].accuracy);
        CHECK(back.cells[i].variant == r.cells[i].variant);
        CHECK(back.cells[i].fault_type == r.cells[i].fault_type);
        CHECK(back.cells[i].failed == r.cells[i].failed);
        CHECK(back.cells[i].samples == r.cells[i].samples);
        CHECK(back.cells[i].snr_db == r.cells[i].snr_db);
    }
    std::ostringstream again;
    write_cells_csv(again, back);
    CHECK(again.str() == out.str());

    std::istringstream wrong("a,b,c\n");
    CHECK_THROWS_AS(read_cells_csv(wrong), InputError);
    std::istringstream short_row(std::string(kCellHeader) + "\nobservability,with_neighbors,ALL\n");
    CHECK_THROWS_AS(read_cells_csv(short_row), InputError);
    CHECK_THROWS_AS(load_cells_csv("/nonexistent/cells.csv"), DependencyError);
}

TEST_CASE("pivot table") {
    std::ostringstream out;
    write_pivot_csv(out, sample_report());
    std::istringstream lines(out.str());
    std::string header, row;
    std::getline(lines, header);
    CHECK(header == "fault_type,variant,1,0.3,0.2");
    bool found = false;
    while (std::getline(lines, row)) {
        if (row.rfind("ALL,with_neighbors,", 0) == 0) {
            CHECK(row == "ALL,with_neighbors,99.50,29.50,failed");
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("summary schema") {
    auto r = sample_report();
    std::vector<double> a(10, 80.0), b(10, 70.0);
    for (int i = 0; i < 10; ++i) {
        a[static_cast<std::size_t>(i)] += i;
        b[static_cast<std::size_t>(i)] += i;
    }
    r.significance = compare_samples(a, b, 0.05, "with_neighbors", "no_neighbors");
    const auto j = nlohmann::json::parse(summary_json(r));
    std::vector<std::string> keys;
    const auto ordered = nlohmann::ordered_json::parse(summary_json(r));
    for (const auto& [k, v] : ordered.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"format", "version", "sweep", "cells", "failed_cells", "mean_accuracy",
                                           "mean_degradation", "significance"});
    CHECK(j["sweep"] == "observability");
    CHECK(j["failed_cells"] == 1);
    CHECK(j["mean_accuracy"]["with_neighbors"]["ALL"]["1"].get<double>() == doctest::Approx(99.5));
    CHECK(j["mean_degradation"]["with_neighbors"].get<double>() == doctest::Approx(70.0));
    CHECK(j["significance"]["reject"].get<bool>());
    CHECK(j["significance"]["u1"].get<double>() + j["significance"]["u2"].get<double>() == doctest::Approx(100.0));

    const auto dir = scratch_dir("report");
    save_report(dir, r);
    for (const char* name : {"cells.csv", "table.csv", "summary.json"}) CHECK(std::filesystem::exists(dir / name));
    CHECK(load_cells_csv(dir / "cells.csv").cells.size() == r.cells.size());
}

TEST_CASE("svg plot") {
    std::ostringstream out;
    render_svg(out, sample_report(), "accuracy <test>");
    const auto svg = out.str();
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("accuracy &lt;test&gt;") != std::string::npos);
    CHECK(svg.find("with_neighbors") != std::string::npos);
    CHECK(std::count(svg.begin(), svg.end(), '\n') > 5);
}

TEST_CASE("checkpoint round trip") {
    Architecture arch;
    arch.bus_count = 5;
    arch.line_count = 6;
    arch.channels = 2;
    arch.kernel = 3;
    arch.hidden = 7;
    auto rng = substream(4, "init");
    Checkpoint ck;
    ck.params = ModelParams::glorot(arch, rng);
    ck.optimizer.learning_rate = 2e-3;
    ck.optimizer.mean_square = RealVector::Random(ck.params.values().size()).cwiseAbs();
    ck.scaler.mean = RealVector::Random(10);
    ck.scaler.scale = RealVector::Ones(10);
    ck.config_digest = "abc123";
    std::ostringstream state;
    state << rng;
    ck.rng_state = state.str();
    ck.step = 42;

    std::ostringstream first;
    write_checkpoint(first, ck);
    std::istringstream in(first.str());
    const auto back = read_checkpoint(in);
    CHECK(back.params.values() == ck.params.values());
    CHECK(back.params.arch().hidden == 7);
    CHECK(back.optimizer.mean_square == ck.optimizer.mean_square);
    CHECK(back.scaler.mean == ck.scaler.mean);
    CHECK(back.config_digest == "abc123");
    CHECK(back.step == 42);
    std::mt19937_64 restored;
    std::istringstream(back.rng_state) >> restored;
    CHECK(restored() == rng());
    std::ostringstream second;
    write_checkpoint(second, back);
    CHECK(second.str() == first.str());

    std::istringstream truncated(first.str().substr(0, first.str().size() / 2));
    CHECK_THROWS_AS(read_checkpoint(truncated), InputError);
    std::istringstream junk("XXXX");
    CHECK_THROWS_AS(read_checkpoint(junk), InputError);
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/checkpoint.bin"), DependencyError);

    const auto dir = scratch_dir("checkpoint");
    save_checkpoint(dir / "ck.bin", ck);
    CHECK(load_checkpoint(dir / "ck.bin").params.values() == ck.params.values());
}
