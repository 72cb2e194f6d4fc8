#include <filesystem>
#include <vector>

#include "catmon/errors.hpp"
#include "catmon/simulate.hpp"
#include "doctest.h"

using namespace catmon;
using nlohmann::json;

namespace {

json table1_population() {
    return json::array({{{"case", "a"}, {"count", 400}, {"kind", "nominal"}, {"probs", {0.5, 0.5}}},
                        {{"case", "b"}, {"count", 300}, {"kind", "nominal"}, {"probs", {0.3, 0.4, 0.3}}},
                        {{"case", "c"}, {"count", 300}, {"kind", "nominal"}, {"probs", {0.2, 0.3, 0.1, 0.4}}}});
}

json small_scenario() {
    return {{"schema_version", 1},
            {"name", "small"},
            {"population",
             {{{"case", "a"}, {"count", 12}, {"kind", "nominal"}, {"probs", {0.5, 0.5}}},
              {{"case", "d"}, {"count", 6}, {"kind", "ordinal"}, {"cutpoints", {-1.0, 0.2, 0.8}}}}},
            {"rows",
             {{{"label", "a=4"}, {"shifts", {{{"case", "a"}, {"count", 4}, {"xi", {0.1, -0.1}}}}}},
              {{"label", "d=2"}, {"shifts", {{{"case", "d"}, {"count", 2}, {"delta", 0.4}}}}}}},
            {"target_arl0", 40},
            {"reps", 200}};
}

}  // namespace

TEST_CASE("build_population for the three-case nominal population") {
    json j = {{"schema_version", 1}, {"population", table1_population()}, {"rows", json::array()}};
    auto s = parse_scenario(j);
    ShiftRow row{"a=100", {{"a", 100, NominalShift{{0.03, -0.03}}}}};
    const auto pop = build_population(s, row);
    REQUIRE(pop.specs.size() == 1000);
    int shifted = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
        if (!std::holds_alternative<NoShift>(pop.shifts[i])) {
            ++shifted;
            CHECK(i < 100);
        }
    }
    CHECK(shifted == 100);
    CHECK(pop.specs[399].levels() == 2);
    CHECK(pop.specs[400].levels() == 3);
    CHECK(pop.specs[999].levels() == 4);

    const auto ic = build_population(s);
    for (const auto& sh : ic.shifts) CHECK(std::holds_alternative<NoShift>(sh));

    CHECK_THROWS_AS(build_population(s, ShiftRow{"x", {{"a", 401, NominalShift{{0.03, -0.03}}}}}), InputError);
    CHECK_THROWS_AS(build_population(s, ShiftRow{"x", {{"z", 1, NominalShift{{0.03, -0.03}}}}}), InputError);
    CHECK_THROWS_AS(build_population(s, ShiftRow{"x", {{"b", 1, NominalShift{{0.03, -0.03}}}}}), ShiftError);
}

TEST_CASE("mixed population with an ordinal case") {
    json pop = table1_population();
    for (auto& c : pop) c["count"] = 250;
    pop.push_back({{"case", "d"}, {"count", 250}, {"kind", "ordinal"}, {"cutpoints", {-1.0, 0.2, 0.8}}});
    auto s = parse_scenario({{"schema_version", 1}, {"population", pop}});
    const auto p = build_population(s, ShiftRow{"d", {{"d", 10, OrdinalShift{0.1}}}});
    CHECK(p.specs.size() == 1000);
    CHECK(p.specs[750].is_ordinal());
    CHECK(std::holds_alternative<OrdinalShift>(p.shifts[759]));
    CHECK(std::holds_alternative<NoShift>(p.shifts[760]));
}

TEST_CASE("scenario parse errors") {
    json j = small_scenario();
    j["colour"] = "red";
    CHECK_THROWS_AS(parse_scenario(j), InputError);
    j = small_scenario();
    j["rows"][0]["shifts"][0]["count"] = 13;
    CHECK_THROWS_AS(parse_scenario(j), InputError);
    j = small_scenario();
    j["schema_version"] = 7;
    CHECK_THROWS_AS(parse_scenario(j), InputError);
    j = small_scenario();
    j["statistics"] = {"median"};
    CHECK_THROWS_AS(parse_scenario(j), InputError);
}

TEST_CASE("bundled scenarios parse") {
    const std::filesystem::path dir = CATMON_SOURCE_DIR "/scenarios";
    int count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        INFO(entry.path().string());
        auto s = load_scenario(entry.path());
        CHECK(build_population(s).specs.size() == 1000);
        apply_preset(s, "full");
        CHECK(s.reps == 10000);
        apply_preset(s, "desk");
        CHECK(s.reps == 2000);
        ++count;
    }
    CHECK(count >= 7);
}

TEST_CASE("run_table: calibration once, IC row, determinism") {
    const auto s = parse_scenario(small_scenario());
    const auto table = run_table(s);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0].label == "IC");
    REQUIRE(table.calibration.size() == 3);
    for (std::size_t c = 0; c < 3; ++c) {
        const auto& ic = table.rows[0].cells[c];
        CHECK(std::fabs(ic.arl - 40.0) <= 3.0 * ic.se + 0.02 * 40.0);
        CHECK(table.limits[c] == table.calibration[c].limit);
        // OC rows alarm sooner than the in-control chart
        CHECK(table.rows[1].cells[c].arl < ic.arl);
    }
    RunOptions par;
    par.parallel_cells = true;
    const auto again = run_table(s, par);
    CHECK(export_csv(again) == export_csv(table));
}

TEST_CASE("export round trip and layout") {
    ResultTable t;
    t.name = "one";
    t.statistics = {Statistic::zhang};
    t.limits = {3.889};
    t.rows.push_back({"a=1", {{6.4400000000000004, 0.0123456789, 2000, 0.0, 20000}}});
    const auto csv = export_csv(t);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    const auto back = parse_csv(csv);
    REQUIRE(back.rows.size() == 1);
    CHECK(back.rows[0].cells[0].arl == t.rows[0].cells[0].arl);
    CHECK(back.rows[0].cells[0].se == t.rows[0].cells[0].se);
    CHECK(back.limits == t.limits);
    CHECK(export_csv(back).substr(0) == csv);

    ResultTable grid;
    grid.statistics = {Statistic::zhang, Statistic::max, Statistic::sum};
    grid.limits = {10.0, 0.999, 520.0};
    for (int a : {1, 5, 10, 100, 400}) {
        grid.rows.push_back({"a=" + std::to_string(a),
                             {{136.0 / a, 1.21, 2000, 0, 20000}, {120.0, 1.07, 2000, 0, 20000}, {317, 3.06, 2000, 0, 20000}}});
    }
    const auto text = export_text(grid);
    const auto header = text.substr(0, text.find('\n'));
    CHECK(header.find("T |") != std::string::npos);
    CHECK(header.find("Q |") != std::string::npos);
    CHECK(header.back() == 'S');
    CHECK(text.find("(1.21)") != std::string::npos);
    const auto back_grid = parse_csv(export_csv(grid));
    CHECK(back_grid.rows.size() == 5);
    CHECK(export_csv(back_grid) == export_csv(grid));
}
