// dephasim <job> --config <path> [--out <path>] [--format csv|json]

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "dephasim/dephasim.h"

int main(int argc, char** argv) {
    CLI::App app{"Exact dephasing dynamics of an oscillator energy-coupled to an oscillator bath"};
    app.set_version_flag("--version", std::string("dephasim ") + dphs_version());

    std::string job;
    std::string config_path;
    std::string out_path;
    std::string format;
    app.add_option("job", job, "finite | continuum | closed_form | evolve | oracle | periodicity | compare")
        ->required()
        ->check(CLI::IsMember({"finite", "continuum", "closed_form", "evolve", "oracle", "periodicity", "compare"}));
    app.add_option("--config,-c", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--out,-o", out_path, "output path (default: config 'output', else standard output)");
    app.add_option("--format,-f", format, "output format")->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    char* text = nullptr;
    const dphs_status status = dphs_run_config_file(job.c_str(), config_path.c_str(),
                                                    out_path.empty() ? nullptr : out_path.c_str(),
                                                    format.empty() ? nullptr : format.c_str(), &text);
    if (status != DPHS_OK) {
        std::cerr << "dephasim: " << dphs_status_name(status) << ": " << dphs_last_error() << "\n";
        return dphs_exit_code(status);
    }
    if (text != nullptr) {
        std::fputs(text, stdout);
        dphs_string_free(text);
    }
    return 0;
}
