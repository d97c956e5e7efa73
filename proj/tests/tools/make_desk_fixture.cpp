#include <iostream>

#include <CLI11.hpp>

#include "temsa/expctl.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Write a synthetic desk corpus (manifest, images, fixture detection cache)"};
    std::string dir;
    temsa::expctl::DeskFixtureOptions opts;
    app.add_option("dir", dir, "Output directory")->required();
    app.add_option("--samples", opts.samples, "Number of samples")->check(CLI::Range(9, 500));
    app.add_option("--seed", opts.seed, "Generator seed");
    CLI11_PARSE(app, argc, argv);
    try {
        const auto f = temsa::expctl::make_desk_fixture(dir, opts);
        std::cout << f.manifest << "\n" << f.detection_cache << "\n";
    } catch (const std::exception& e) {
        std::cerr << "make_desk_fixture: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
