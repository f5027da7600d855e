// Regenerates demo/cassette by running the demo pipeline in record mode
// against the scripted fake LLM.
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "dualmem/cli/cli.hpp"
#include "dualmem/dataset/dataset.hpp"
#include "dualmem/testing/demo.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{"Record the demo cassette"};
    std::string demo_dir = "demo";
    std::string work_dir;
    bool fresh = false;
    app.add_option("--demo-dir", demo_dir, "Directory holding rolememo_demo.jsonl and demo.toml")
        ->check(CLI::ExistingDirectory);
    app.add_option("--work-dir", work_dir, "Where pipeline outputs go (default: a temp directory)");
    app.add_flag("--fresh", fresh, "Delete existing cassette entries first");
    CLI11_PARSE(app, argc, argv);

    const auto paths = dualmem::testing::demo_paths(demo_dir);
    if (fresh && fs::exists(paths.cassette)) {
        for (const auto& e : fs::directory_iterator(paths.cassette)) {
            if (e.path().extension() == ".json") fs::remove(e.path());
        }
    }
    fs::path work = work_dir.empty() ? fs::temp_directory_path() / "dualmem-demo-record" : fs::path(work_dir);
    fs::remove_all(work);

    auto transport = dualmem::testing::demo_transport(dualmem::load_records(paths.dataset));
    for (const auto& args : dualmem::testing::demo_pipeline(paths, work)) {
        auto full = dualmem::testing::with_global_flags(args, {"--record", paths.cassette.string()});
        int rc = dualmem::cli::run_with_transport(full, std::cout, std::cerr, transport);
        if (rc != 0) {
            std::cerr << "step failed with exit code " << rc << "\n";
            return rc;
        }
    }
    std::cout << "cassette written to " << paths.cassette << " (" << transport->calls() << " scripted calls)\n";
    return 0;
}
