// Command line front end: bootstrap the domain, run the area study, certify
// periodic orbits, or dump the transition graph and a phase-plane picture.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mapcert/errors.hpp"
#include "mapcert/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::vector<std::string> sets; // raw key=value overrides
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config, "configuration file (key=value lines)")
        ->check(CLI::ExistingFile);
    cmd->add_option("-D,--set", args.sets,
                    "override one configuration key, e.g. -D nominal=400 (repeatable)");
}

mapcert::RunConfig resolve(const CommonArgs& args) {
    mapcert::RunConfig cfg;
    if (!args.config.empty()) cfg = mapcert::RunConfig::from_file(args.config);
    for (const std::string& kv : args.sets) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw mapcert::ParseError("--set expects key=value, got \"" + kv + "\"");
        cfg.apply(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

std::ofstream open_out(const std::filesystem::path& p) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream os(p);
    if (!os) throw mapcert::Error("cannot write " + p.string());
    return os;
}

mapcert::TransitionGraph build_reduced(const mapcert::MapContext& ctx,
                                       const mapcert::RunConfig& cfg, mapcert::Partition& part,
                                       int levels) {
    mapcert::Interval dom(cfg.domain_lo, cfg.domain_hi);
    if (cfg.bootstrap)
        dom = mapcert::bootstrap_domain(ctx, dom, cfg.bootstrap_cells, cfg.bootstrap_rounds,
                                        cfg.workers);
    mapcert::BuildOptions bo;
    bo.workers = cfg.workers;
    part = mapcert::Partition::uniform(dom, cfg.nominal);
    mapcert::TransitionGraph g = mapcert::reduce_graph(mapcert::build_graph(ctx, part, bo));
    for (int l = 0; l < levels && g.node_count() > 0; ++l) {
        auto next = mapcert::refine(ctx, g, part, bo);
        g = std::move(next.first);
        part = std::move(next.second);
    }
    return g;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rigorous periodic-orbit certification for generating-function maps"};
    app.require_subcommand(1);

    CommonArgs boot_args, measure_args, certify_args, dump_args, plot_args;
    std::string dump_out = "-", plot_out = "cover.svg";
    int dump_levels = 0, plot_levels = 0;

    CLI::App* boot = app.add_subcommand("bootstrap", "shrink the domain to the surviving hull");
    add_common(boot, boot_args);

    CLI::App* measure = app.add_subcommand("measure", "area of the cover under refinement");
    add_common(measure, measure_args);

    CLI::App* certify = app.add_subcommand("certify", "enclose and classify periodic orbits");
    add_common(certify, certify_args);

    CLI::App* dump = app.add_subcommand("graph-dump", "write the reduced transition graph");
    add_common(dump, dump_args);
    dump->add_option("-o,--out", dump_out, "output file, - for stdout");
    dump->add_option("--levels", dump_levels, "refinement levels before dumping");

    CLI::App* plot = app.add_subcommand("plot", "phase-plane picture of the cover");
    add_common(plot, plot_args);
    plot->add_option("-o,--out", plot_out, "output SVG file");
    plot->add_option("--levels", plot_levels, "refinement levels before plotting");

    CLI11_PARSE(app, argc, argv);

    try {
        if (boot->parsed()) {
            mapcert::RunConfig cfg = resolve(boot_args);
            mapcert::MapContext ctx = mapcert::make_context(cfg);
            mapcert::Interval dom = mapcert::bootstrap_domain(
                ctx, mapcert::Interval(cfg.domain_lo, cfg.domain_hi), cfg.bootstrap_cells,
                cfg.bootstrap_rounds, cfg.workers);
            std::printf("domain_lo=%.17g\ndomain_hi=%.17g\n", dom.lo(), dom.hi());
        } else if (measure->parsed()) {
            mapcert::RunConfig cfg = resolve(measure_args);
            mapcert::MapContext ctx = mapcert::make_context(cfg);
            mapcert::MeasureStudy study = mapcert::run_measure_study(ctx, cfg);
            auto os = open_out(std::filesystem::path(cfg.output_dir) / "measure.csv");
            mapcert::write_measure_csv(os, study);
            mapcert::write_measure_csv(std::cout, study);
        } else if (certify->parsed()) {
            mapcert::RunConfig cfg = resolve(certify_args);
            mapcert::MapContext ctx = mapcert::make_context(cfg);
            mapcert::CertificationReport rep = mapcert::run_certification(ctx, cfg);
            std::filesystem::path dir(cfg.output_dir);
            {
                auto os = open_out(dir / "cycles.csv");
                mapcert::write_cycles_csv(os, rep);
            }
            {
                auto os = open_out(dir / "verdicts.csv");
                mapcert::write_verdicts_csv(os, rep);
            }
            {
                auto os = open_out(dir / "summary.txt");
                mapcert::write_summary(os, rep);
            }
            mapcert::write_summary(std::cout, rep);
        } else if (dump->parsed()) {
            mapcert::RunConfig cfg = resolve(dump_args);
            mapcert::MapContext ctx = mapcert::make_context(cfg);
            mapcert::Partition part;
            mapcert::TransitionGraph g = build_reduced(ctx, cfg, part, dump_levels);
            if (dump_out == "-") {
                mapcert::dump_graph(std::cout, g);
            } else {
                auto os = open_out(dump_out);
                mapcert::dump_graph(os, g);
            }
        } else if (plot->parsed()) {
            mapcert::RunConfig cfg = resolve(plot_args);
            mapcert::MapContext ctx = mapcert::make_context(cfg);
            mapcert::Partition part;
            mapcert::TransitionGraph g = build_reduced(ctx, cfg, part, plot_levels);
            auto os = open_out(plot_out);
            mapcert::write_cover_svg(os, ctx, g, part);
        }
    } catch (const mapcert::EmptyInvariantSet& e) {
        std::cout << e.what() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
