// Writes a small procedural corpus (signs, backgrounds, obstacles, config)
// that `signsynth run` can consume directly.

#include <iostream>

#include "CLI11.hpp"

#include "signsynth/demo.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Generate a procedural demo corpus"};
    std::string dir;
    signsynth::demo::CorpusSpec spec;
    app.add_option("dir", dir, "Output directory")->required();
    app.add_option("--signs", spec.signs, "Number of sign sprites")->check(CLI::Range(1, 100000))->capture_default_str();
    app.add_option("--backgrounds", spec.backgrounds, "Number of backgrounds")
        ->check(CLI::Range(1, 10000))
        ->capture_default_str();
    app.add_option("--seed", spec.seed, "Texture seed")->capture_default_str();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    try {
        signsynth::demo::write_corpus(dir, spec);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cout << "wrote demo corpus to " << dir << "\n";
    return 0;
}
