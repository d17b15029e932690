#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "litmine/config.hpp"
#include "litmine/errors.hpp"
#include "litmine/filter.hpp"
#include "litmine/pipeline.hpp"

namespace fs = std::filesystem;
using namespace litmine;

namespace {

std::string read_file(const fs::path& path, std::string_view what)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cli", std::string(what) + " file not found: " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Common {
    std::string config;
    std::string run_dir;
    std::size_t workers = 0;
    bool verbose = false;
};

struct TaskArgs {
    std::string text;
    std::string file;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("-c,--config", c.config, "Run configuration file")->required();
    cmd->add_option("--run-dir", c.run_dir, "Run directory (default: output_dir from the config)");
    cmd->add_option("-j,--workers", c.workers, "Worker threads (default: hardware threads)");
    cmd->add_flag("-v,--verbose", c.verbose, "Log progress");
}

void add_task(CLI::App* cmd, TaskArgs& t)
{
    auto* text = cmd->add_option("--task", t.text, "Task description");
    cmd->add_option("--task-file", t.file, "File holding the task description")->excludes(text);
}

std::optional<std::string> resolve_task(const TaskArgs& t, const RunConfig& config)
{
    if (!t.text.empty()) {
        return t.text;
    }
    if (!t.file.empty()) {
        return read_file(t.file, "task");
    }
    if (config.task_file) {
        return read_file(*config.task_file, "task");
    }
    return std::nullopt;
}

Pipeline make_pipeline(const Common& c)
{
    auto config = RunConfig::load(c.config);
    PipelineOptions opts;
    if (!c.run_dir.empty()) {
        opts.run_dir = fs::path(c.run_dir);
    }
    opts.workers = c.workers;
    if (const char* token = std::getenv(config.oracle_token_env.c_str()); token && *token) {
        opts.oracle_token = token;
    }
    return Pipeline(std::move(config), std::move(opts));
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Entity-filtered literature mining pipeline"};
    app.require_subcommand(1);

    Common common;
    TaskArgs task;
    std::string spec_path;
    std::size_t top_k = 10;
    std::string stop_after;

    auto* ingest = app.add_subcommand("ingest", "Load the corpus and write its window table");
    auto* index = app.add_subcommand("index", "Load tags and build the entity index");
    auto* query = app.add_subcommand("query", "Run a filter spec and print ranked windows");
    auto* loop = app.add_subcommand("probe-loop", "Refine probes and induce the extraction schema");
    auto* extract = app.add_subcommand("extract", "Rank papers and extract records");
    auto* judge = app.add_subcommand("judge", "Grade records and keep those passing every axis");
    auto* analyze = app.add_subcommand("analyze", "Effect sizes, coverage and disagreement reports");
    auto* run = app.add_subcommand("run", "Run or resume every stage");
    for (auto* cmd : {ingest, index, query, loop, extract, judge, analyze, run}) {
        add_common(cmd, common);
    }
    query->add_option("--spec", spec_path, "Filter spec JSON file")->required();
    query->add_option("-k,--top-k", top_k, "Number of hits")->check(CLI::PositiveNumber);
    add_task(loop, task);
    add_task(run, task);
    run->add_option("--stop-after", stop_after, "Stop once this stage is complete");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        auto code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::usage);
    }

    spdlog::set_default_logger(spdlog::stderr_color_mt("litmine"));
    spdlog::set_level(common.verbose ? spdlog::level::info : spdlog::level::warn);

    try {
        auto pipeline = make_pipeline(common);
        if (ingest->parsed()) {
            pipeline.run_stage(Stage::Ingest);
        } else if (index->parsed()) {
            pipeline.run_stage(Stage::Index);
        } else if (query->parsed()) {
            auto spec = parse_filter_spec(read_file(spec_path, "filter spec"));
            pipeline.query(spec, top_k, std::cout);
        } else if (loop->parsed()) {
            pipeline.run_stage(Stage::ProbeLoop, resolve_task(task, pipeline.config()));
        } else if (extract->parsed()) {
            pipeline.run_stage(Stage::Extract);
        } else if (judge->parsed()) {
            pipeline.run_stage(Stage::Judge);
        } else if (analyze->parsed()) {
            pipeline.run_stage(Stage::Analyze);
        } else if (run->parsed()) {
            std::optional<Stage> stop;
            if (!stop_after.empty()) {
                stop = parse_stage(stop_after);
            }
            pipeline.run(resolve_task(task, pipeline.config()), stop);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::data);
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
