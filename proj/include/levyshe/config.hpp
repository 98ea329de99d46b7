#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "levyshe/growth.hpp"
#include "levyshe/levy_measure.hpp"
#include "levyshe/simulator.hpp"

namespace levyshe {

// Minimal structured-text config: [section] tables of key = value pairs with
// numbers, strings, booleans and numeric arrays. '#' starts a comment.
using ConfigValue = std::variant<double, std::string, bool, std::vector<double>>;
using ConfigTable = std::map<std::string, ConfigValue>;
using ConfigTree = std::map<std::string, ConfigTable>;

ConfigTree parse_config_text(const std::string& text);
std::string serialize_config_tree(const ConfigTree& tree);

enum class ExperimentKind { Tails, Simulate, McTail, GrowthTest, Peaks };
ExperimentKind experiment_kind_from_name(const std::string& name);
const char* experiment_kind_name(ExperimentKind k);

struct ExperimentConfig {
    LevyMeasureSpec measure = LevyMeasureSpec::point_mass(1.0, 1.0);
    ModelParams model;

    // level grid
    double levels_min = 1.5;
    double levels_max = 1e4;
    int levels_per_decade = 40;

    // simulation
    std::uint64_t seed = 1;
    std::size_t replicates = 10000;
    Estimand estimand = Estimand::MaxContribution;
    double epsilon = -1.0;
    double padding = -1.0;
    Box region;
    int grid_n = 33;
    int threads = 0;
    bool write_replicates = false;

    // growth / peaks
    GrowthTail which = GrowthTail::KernelPeak;
    RateFunction rate = RateFunction::power_log(0.5, 1.0);
    double K = 1.0;
    std::uint64_t n_max = 100000;
    double delta = -1.0;  // <0: default t/2
    std::uint64_t runs = 1;
    EventKind event_kind = EventKind::VEvent;

    // output
    std::string out_dir = "out";
    std::string out_format = "csv";  // csv | json | both

    std::string fingerprint;  // hash of the canonical serialized config + seed

    static ExperimentConfig from_text(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
    std::string to_text() const;

    // reject configs whose measure/model violate the conditions the requested
    // experiment relies on; the message names the failed condition
    void validate_for(ExperimentKind kind) const;
};

std::uint64_t fnv1a64(const std::string& data);

}  // namespace levyshe
