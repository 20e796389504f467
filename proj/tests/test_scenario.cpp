#include "tsg/scenario.hpp"
#include "tsg/synthetic.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace tsg;

namespace {

std::vector<Scenario> read_text(const std::string& text) {
    std::istringstream in(text);
    return read_scenarios(in, default_label_vocabulary());
}

template <class F>
std::string error_message(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Scenario, SingleRecordRoundTrip) {
    const Scenario s = fixture::two_car_scenario();
    const auto loaded = read_text(scenario_to_json_line(s) + "\n");
    ASSERT_EQ(loaded.size(), 1u);
    EXPECT_EQ(loaded[0], s);
}

TEST(Scenario, BlankLinesSkipped) {
    const Scenario s = fixture::two_car_scenario();
    EXPECT_EQ(read_text("\n" + scenario_to_json_line(s) + "\n\n").size(), 1u);
}

TEST(Scenario, StateBeyondHorizonNamesScenario) {
    Scenario s = fixture::two_car_scenario(3);
    s.scenario_id = "bad_horizon";
    s.obstacles[0].states.push_back(fixture::state(3, 15.0, 0.0));
    const auto msg = error_message([&] { read_text(scenario_to_json_line(s)); });
    EXPECT_NE(msg.find("bad_horizon"), std::string::npos);
    EXPECT_THROW(read_text(scenario_to_json_line(s)), ValidationError);
}

TEST(Scenario, InvariantViolations) {
    const auto vocab = default_label_vocabulary();
    auto expect_invalid = [&](auto mutate, const std::string& field) {
        Scenario s = fixture::two_car_scenario();
        mutate(s);
        try {
            validate(s, vocab);
            ADD_FAILURE() << "accepted invalid " << field;
        } catch (const ValidationError& e) {
            EXPECT_NE(std::string(e.what()).find(s.scenario_id), std::string::npos) << e.what();
        }
    };
    expect_invalid([](Scenario& s) { s.obstacles[0].states[0].length = 0.0; }, "length");
    expect_invalid([](Scenario& s) { s.obstacles[0].states[1].t = 0; }, "duplicate t");
    expect_invalid([](Scenario& s) { std::swap(s.obstacles[0].states[0], s.obstacles[0].states[2]); }, "t order");
    expect_invalid([](Scenario& s) { s.obstacles[1].is_ego = true; }, "two egos");
    expect_invalid([](Scenario& s) { s.obstacles[0].states[0].heading = 4.0; }, "heading range");
    expect_invalid([](Scenario& s) { s.road_segments[0].widths.pop_back(); }, "widths length");
    expect_invalid([](Scenario& s) { s.labels = {"not_a_label"}; }, "label vocab");
    expect_invalid(
        [](Scenario& s) {
            s.obstacles[1].role = ObstacleRole::static_;
        },
        "static obstacle moves");
}

TEST(Scenario, EmptyVocabDisablesLabelCheck) {
    Scenario s = fixture::two_car_scenario();
    s.labels = {"anything"};
    EXPECT_NO_THROW(validate(s, {}));
}

TEST(Scenario, ParseErrorCarriesLine) {
    const Scenario s = fixture::two_car_scenario();
    try {
        read_text(scenario_to_json_line(s) + "\n{not json\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Scenario, HundredGeneratedRoundTripThroughFile) {
    std::vector<Scenario> all;
    for (Family f : all_families()) {
        auto part = generate_synthetic(FamilySpec{.family = f}, 17, 5);
        all.insert(all.end(), part.begin(), part.end());
    }
    all.resize(100);
    const auto path = std::filesystem::temp_directory_path() / "tsg_roundtrip.jsonl";
    save_scenarios(path.string(), all);
    const auto loaded = load_scenarios(path.string(), default_label_vocabulary());
    std::filesystem::remove(path);
    ASSERT_EQ(loaded.size(), all.size());
    for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(loaded[i], all[i]) << all[i].scenario_id;
}

TEST(Generator, Deterministic) {
    const auto a = generate_synthetic("left_turn", 1, 7);
    const auto b = generate_synthetic("left_turn", 1, 7);
    EXPECT_EQ(scenario_to_json_line(a[0]), scenario_to_json_line(b[0]));
}

TEST(Generator, UnknownFamily) { EXPECT_THROW(generate_synthetic("hover", 1, 0), ValidationError); }

TEST(Generator, StopAtLightContract) {
    for (const auto& s : generate_synthetic("stop_at_light", 5, 0)) {
        EXPECT_EQ(s.labels, std::vector<std::string>{"on_stopline_traffic_light"});
        EXPECT_LT(ego_statistics(s).terminal_speed, 0.5);
        EXPECT_TRUE(s.yield_annotations.has_value());
    }
}

TEST(Generator, StraightHighSpeedContract) {
    const auto s = generate_synthetic("straight_high_speed", 1, 3)[0];
    const auto st = ego_statistics(s);
    EXPECT_LT(st.max_heading_deviation_deg, 5.0);
    EXPECT_GT(st.mean_speed, 10.0);
}

TEST(Generator, EveryScenarioValidAndWithinSpec) {
    const FamilySpec defaults;
    for (const auto& s : generate_all_families(10, 11)) {
        EXPECT_NO_THROW(validate(s, default_label_vocabulary()));
        EXPECT_GE(s.num_timesteps, defaults.min_timesteps);
        EXPECT_LE(s.num_timesteps, defaults.max_timesteps);
        EXPECT_GE(static_cast<int>(s.obstacles.size()), defaults.min_obstacles);
        EXPECT_LE(static_cast<int>(s.obstacles.size()), defaults.max_obstacles);
        EXPECT_DOUBLE_EQ(s.dt, kGeneratedDt);
    }
}

TEST(Generator, FamiliesSeparable) {
    const SeparabilityMargins margin;
    std::vector<EgoStats> mean;
    for (Family f : all_families()) {
        EgoStats m;
        const auto scenarios = generate_synthetic(FamilySpec{.family = f}, 50, 21);
        for (const auto& s : scenarios) {
            const auto st = ego_statistics(s);
            m.heading_change_deg += st.heading_change_deg / 50.0;
            m.terminal_speed += st.terminal_speed / 50.0;
            m.mean_speed += st.mean_speed / 50.0;
            m.lateral_displacement += st.lateral_displacement / 50.0;
        }
        mean.push_back(m);
    }
    for (std::size_t a = 0; a < mean.size(); ++a) {
        for (std::size_t b = a + 1; b < mean.size(); ++b) {
            const bool separated =
                std::abs(mean[a].heading_change_deg - mean[b].heading_change_deg) >= margin.heading_change_deg ||
                std::abs(mean[a].terminal_speed - mean[b].terminal_speed) >= margin.terminal_speed ||
                std::abs(mean[a].mean_speed - mean[b].mean_speed) >= margin.mean_speed ||
                std::abs(mean[a].lateral_displacement - mean[b].lateral_displacement) >= margin.lateral_displacement;
            EXPECT_TRUE(separated) << to_string(all_families()[a]) << " vs " << to_string(all_families()[b]);
        }
    }
}

TEST(Split, Sizes) {
    const auto all = generate_synthetic("overtake", 100, 1);
    const auto s = split(all, 0.85, 3);
    EXPECT_EQ(s.train.size(), 85u);
    EXPECT_EQ(s.test.size(), 15u);
    const auto two = split(generate_synthetic("overtake", 2, 1), 0.5, 3);
    EXPECT_EQ(two.train.size(), 1u);
    EXPECT_EQ(two.test.size(), 1u);
}

TEST(Split, DeterministicPartition) {
    const auto [a_train, a_test] = split_indices(300, 0.85, 9);
    const auto [b_train, b_test] = split_indices(300, 0.85, 9);
    EXPECT_EQ(a_train, b_train);
    EXPECT_EQ(a_test, b_test);
    std::set<std::size_t> all(a_train.begin(), a_train.end());
    all.insert(a_test.begin(), a_test.end());
    EXPECT_EQ(all.size(), 300u);
    EXPECT_EQ(*all.rbegin(), 299u);
}
