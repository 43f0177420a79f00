#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oscdiff/geometry.hpp"

namespace oscdiff {

enum class TestCase { testcos, testosc };

TestCase parse_test_case(std::string_view name);
std::string_view test_case_name(TestCase t);

/// Every knob of an experiment. Keys of the text format are listed in
/// StudyConfig::keys(); lists are comma separated.
struct StudyConfig {
    TestCase test = TestCase::testcos;
    std::string scheme = "ua2";  ///< ua1 | ua2 | cn | twoscale1 | twoscale2
    int n = 80;                  ///< N
    std::vector<int> n_list{20, 40, 80, 160};
    std::vector<double> eps{1e-2};
    std::vector<double> dt{1e-2};
    double t_fin = 0.1;
    double diffusion = 0.02;  ///< D
    double amplitude = 1.0;   ///< A
    double delta = 1e-2;
    double phi_pot = 1.0;
    std::optional<double> adsorption;  ///< explicit M overrides delta/phi_pot
    double sigma = 0.2;
    double y0 = 0.0;
    double radius = 0.2;  ///< R_B
    Vec2 detector{0.0, -0.5};
    double dt_ref = 1e-5;
    int n_ref = 160;
    std::string ref_scheme = "ua2";
    std::string solver = "krylov";
    std::string ref_solver = "krylov";
    double tolerance = 1e-12;
    int order = 2;        ///< two-scale model order
    bool centered = true;  ///< centered two-scale corrector
    double dt_sub = 0.0;  ///< dense oracle sub-step; 0 selects eps/100
    std::string cache_dir;
    std::string output;
    int threads = 0;  ///< 0 = hardware concurrency

    /// Adsorption length actually used (explicit M or the Lennard-Jones integral).
    double adsorption_length() const;

    static const std::vector<std::string>& keys();
};

/// Sets one key; throws ConfigurationError on unknown keys or malformed values.
void set_config_value(StudyConfig& cfg, std::string_view key, std::string_view value);

/// Parses "key = value" lines; '#' starts a comment.
StudyConfig parse_config(std::string_view text, StudyConfig base = {});
StudyConfig load_config(const std::string& path, StudyConfig base = {});

/// Checks positivity and domain constraints.
void validate(const StudyConfig& cfg);

/// Round-trippable text form, one key per line in keys() order.
std::string to_text(const StudyConfig& cfg);

}  // namespace oscdiff
