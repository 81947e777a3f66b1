// beamsafe: maximum permissible transmit power of laser sources from JSON scenarios.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "scenario.hpp"

namespace {

using beamsafe::cli::json;

enum ExitCode { kOk = 0, kConfig = 2, kDomain = 3, kNumerics = 4 };

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw beamsafe::cli::ConfigError(path, "cannot open config file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw beamsafe::cli::ConfigError(path, std::string("invalid JSON: ") + e.what());
    }
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw beamsafe::cli::ConfigError(out_path, "cannot open output file");
    out << text;
}

int cmd_ptmax(const std::string& config, const std::string& format, const std::string& out_path) {
    const auto result = beamsafe::cli::evaluate(beamsafe::cli::parse_scenario(load_config(config)));
    const json record = beamsafe::cli::to_json(result);
    if (format == "json") {
        emit(record.dump(2) + "\n", out_path);
    } else if (format == "csv") {
        std::vector<beamsafe::cli::SweepRow> rows{{0.0, result, {}}};
        emit(beamsafe::cli::sweep_csv(rows), out_path);
    } else {
        std::cout << beamsafe::cli::report(result);
        std::cout << record.dump() << "\n";
        if (!out_path.empty()) emit(record.dump(2) + "\n", out_path);
    }
    return kOk;
}

int cmd_sweep(const std::string& config, const std::string& axis_name, double from, double to, int steps,
              bool log_spacing, const std::string& format, const std::string& out_path) {
    const auto& axis = beamsafe::cli::find_axis(axis_name);
    const auto values = beamsafe::cli::axis_values(from, to, steps, log_spacing);
    const auto rows = beamsafe::cli::sweep(load_config(config), axis, values);
    if (format == "json") {
        emit(beamsafe::cli::sweep_json(axis, rows).dump(2) + "\n", out_path);
    } else {
        emit(beamsafe::cli::sweep_csv(rows), out_path);
    }
    return kOk;
}

int cmd_field(const std::string& config, double z, int grid_n, const std::string& out_path) {
    const auto scenario = beamsafe::cli::parse_scenario(load_config(config));
    const auto grid = beamsafe::cli::field(scenario, z, grid_n);
    const json sidecar = beamsafe::cli::field_sidecar(grid, scenario.transmit_power);
    emit(beamsafe::cli::field_csv(grid), out_path);
    if (out_path.empty()) {
        std::cerr << sidecar.dump(2) << "\n";
    } else {
        emit(sidecar.dump(2) + "\n", out_path + ".json");
    }
    return kOk;
}

int cmd_presets(const std::string& format) {
    if (format == "json") {
        json arr = json::array();
        for (const auto& p : beamsafe::kModePresets) {
            json modes = json::array();
            for (std::size_t k = 0; k < p.coefficients.size(); ++k) {
                if (p.coefficients[k] == 0.0) continue;
                modes.push_back({{"family", "LG"},
                                 {"l", beamsafe::kPresetModes[k][0]},
                                 {"m", beamsafe::kPresetModes[k][1]},
                                 {"coefficient", p.coefficients[k]}});
            }
            arr.push_back({{"name", std::string(p.name)},
                           {"modes", modes},
                           {"published_divergence_ratio", p.published_divergence_ratio}});
        }
        std::cout << arr.dump(2) << "\n";
        return kOk;
    }
    std::cout << "name       LG00    LG10    LG20    LG01    LG30    LG11    theta_R/theta\n";
    for (const auto& p : beamsafe::kModePresets) {
        std::ostringstream line;
        line << std::string(p.name) << "  ";
        for (double c : p.coefficients) {
            std::string v = beamsafe::cli::format_number(c);
            v.resize(std::max<std::size_t>(v.size(), 8), ' ');
            line << v;
        }
        line << p.published_divergence_ratio;
        std::cout << line.str() << "\n";
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laser eye and skin safety: maximum permissible transmit power"};
    app.require_subcommand(1);

    std::string config;
    std::string format = "text";
    std::string out_path;

    auto* ptmax = app.add_subcommand("ptmax", "Evaluate one scenario");
    ptmax->add_option("--config", config, "Scenario JSON")->required();
    ptmax->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "csv", "json"}));
    ptmax->add_option("--out", out_path, "Write the machine-readable record here");

    std::string axis;
    double from = 0.0;
    double to = 0.0;
    int steps = 11;
    bool log_spacing = false;
    auto* sweep = app.add_subcommand("sweep", "Sweep one scenario parameter");
    sweep->add_option("--config", config, "Scenario JSON")->required();
    sweep->add_option("--axis", axis, "t_ex|wavelength|divergence|focal_length|d1|pitch|theta_d")->required();
    sweep->add_option("--from", from, "First axis value (axis units)")->required();
    sweep->add_option("--to", to, "Last axis value (axis units)")->required();
    sweep->add_option("--steps", steps, "Number of points");
    sweep->add_flag("--log", log_spacing, "Logarithmic spacing");
    sweep->add_option("--format", format, "csv or json")->check(CLI::IsMember({"text", "csv", "json"}));
    sweep->add_option("--out", out_path, "Output file");

    double z = 0.0;
    int grid_n = 201;
    auto* field = app.add_subcommand("field", "Export the irradiance field in one plane");
    field->add_option("--config", config, "Scenario JSON")->required();
    field->add_option("--z-m", z, "Plane distance from the waist [m]");
    field->add_option("--grid", grid_n, "Samples per side (<= 4096)");
    field->add_option("--out", out_path, "CSV output; the peak sidecar goes to <out>.json");

    auto* presets = app.add_subcommand("presets", "Built-in mode combinations");
    auto* presets_list = presets->add_subcommand("list", "List the named LG combinations");
    presets_list->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    presets->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*ptmax) return cmd_ptmax(config, format, out_path);
        if (*sweep) return cmd_sweep(config, axis, from, to, steps, log_spacing, format, out_path);
        if (*field) return cmd_field(config, z, grid_n, out_path);
        if (*presets_list) return cmd_presets(format);
    } catch (const beamsafe::UnsupportedDomainError& e) {
        std::cerr << "unsupported domain (" << e.bound() << "): " << e.what() << "\n";
        return kDomain;
    } catch (const beamsafe::NumericsError& e) {
        std::cerr << "numerics failure: " << e.what() << " (partial value " << e.partial_value() << ", residual "
                  << e.residual() << ")\n";
        return kNumerics;
    } catch (const beamsafe::ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    }
    return kOk;
}
