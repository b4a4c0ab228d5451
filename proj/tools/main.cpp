// mspline command-line tool: fit, reproject, compare, embed, sample,
// bench. Configuration precedence: flags > --config file > defaults.

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mspline/commands.hpp"
#include "mspline/errors.hpp"

namespace {

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoi(item));
    }
    if (out.empty()) throw CLI::ValidationError("expected a comma-separated int list");
    return out;
}

std::vector<std::string> parse_str_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// Raw flag storage; only values whose flags were actually given are
// applied over the config file.
struct CommonFlags {
    std::string config_file;
    int k = 0;
    int degree = 0;
    double mu = 0.0;
    int t_prime = 0;
    std::string schedule;
    double delta = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    int knn = 0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    int workers = 0;
    bool rigidity_disp = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_file, "JSON config file");
        cmd->add_option("--k", k, "control points per trajectory");
        cmd->add_option("--degree", degree, "spline degree");
        cmd->add_option("--mu", mu, "regularization weight");
        cmd->add_option("--t-prime", t_prime, "transport reference frame count");
        cmd->add_option("--schedule", schedule, "embedding level counts, comma separated");
        cmd->add_option("--delta", delta, "robust loss knee");
        cmd->add_option("--lambda1", lambda1, "correspondence weight");
        cmd->add_option("--lambda2", lambda2, "rigidity weight");
        cmd->add_option("--knn", knn, "rigidity neighborhood size");
        cmd->add_option("--samples", samples, "surface sample count");
        cmd->add_option("--seed", seed, "sampling seed");
        cmd->add_option("--workers", workers, "worker threads (0: auto)");
        cmd->add_flag("--rigidity-displacements", rigidity_disp,
                      "rigidity on displacement differences instead of edge lengths");
    }

    mspline::RunConfig resolve(CLI::App* cmd) const {
        mspline::RunConfig cfg;
        if (cmd->count("--config") > 0) cfg = mspline::load_config_file(config_file);
        if (cmd->count("--k") > 0) cfg.control_count = k;
        if (cmd->count("--degree") > 0) cfg.degree = degree;
        if (cmd->count("--mu") > 0) cfg.mu = mu;
        if (cmd->count("--t-prime") > 0) cfg.reference_frames = t_prime;
        if (cmd->count("--schedule") > 0) cfg.schedule = parse_int_list(schedule);
        if (cmd->count("--delta") > 0) cfg.delta = delta;
        if (cmd->count("--lambda1") > 0) cfg.lambda1 = lambda1;
        if (cmd->count("--lambda2") > 0) cfg.lambda2 = lambda2;
        if (cmd->count("--knn") > 0) cfg.knn_k = knn;
        if (cmd->count("--samples") > 0) cfg.sample_count = samples;
        if (cmd->count("--seed") > 0) cfg.seed = seed;
        if (cmd->count("--workers") > 0) cfg.workers = workers;
        if (cmd->count("--rigidity-displacements") > 0) {
            cfg.rigidity_on_displacements = rigidity_disp;
        }
        return cfg;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"B-spline motion compression toolkit"};
    app.require_subcommand(1);
    int exit_code = mspline::kExitOk;

    // fit
    auto* fit = app.add_subcommand("fit", "fit control grids for every manifest entry");
    mspline::FitOptions fit_opt;
    CommonFlags fit_flags;
    fit->add_option("manifest", fit_opt.manifest, "dataset manifest JSON")->required();
    fit->add_option("--out", fit_opt.out_dir, "output directory")->required();
    fit->add_flag("--strict", fit_opt.strict, "abort on the first bad sequence");
    fit_flags.attach(fit);
    fit->callback([&]() {
        exit_code = mspline::cmd_fit(fit_opt, fit_flags.resolve(fit), std::cerr);
    });

    // reproject
    auto* rep = app.add_subcommand("reproject", "resample a control grid to frames");
    mspline::ReprojectOptions rep_opt;
    CommonFlags rep_flags;
    rep->add_option("controls", rep_opt.controls, "controls archive")->required();
    rep->add_option("--frames", rep_opt.frames, "output frame count")->required();
    rep->add_option("--out", rep_opt.out, "output trajectory archive")->required();
    rep->add_option("--base", rep_opt.base_obj, "base OBJ mesh; also emit OBJ frames");
    rep_flags.attach(rep);
    rep->callback([&]() {
        exit_code = mspline::cmd_reproject(rep_opt, rep_flags.resolve(rep), std::cerr);
    });

    // compare
    auto* cmp = app.add_subcommand("compare", "score methods against ground truth");
    mspline::CompareOptions cmp_opt;
    CommonFlags cmp_flags;
    std::string cmp_methods, cmp_ks;
    cmp->add_option("manifest", cmp_opt.manifest, "dataset manifest JSON")->required();
    cmp->add_option("--methods", cmp_methods, "comma list: bspline,linear");
    cmp->add_option("--ks", cmp_ks, "comma list of control counts");
    cmp->add_option("--out", cmp_opt.out_report, "TSV report path (default stdout)");
    cmp_flags.attach(cmp);
    cmp->callback([&]() {
        if (!cmp_methods.empty()) cmp_opt.methods = parse_str_list(cmp_methods);
        if (!cmp_ks.empty()) cmp_opt.control_counts = parse_int_list(cmp_ks);
        exit_code = mspline::cmd_compare(cmp_opt, cmp_flags.resolve(cmp), std::cerr);
    });

    // embed
    auto* emb = app.add_subcommand("embed", "build the multilevel embedding of controls");
    mspline::EmbedOptions emb_opt;
    CommonFlags emb_flags;
    emb->add_option("controls", emb_opt.controls, "controls archive")->required();
    emb->add_option("--out", emb_opt.out, "output embedding archive")->required();
    emb->add_flag("--verify", emb_opt.verify, "check the reconstruction round trip");
    emb_flags.attach(emb);
    emb->callback([&]() {
        exit_code = mspline::cmd_embed(emb_opt, emb_flags.resolve(emb), std::cerr);
    });

    // sample
    auto* smp = app.add_subcommand("sample", "draw surface sample sets for mesh entries");
    mspline::SampleOptions smp_opt;
    CommonFlags smp_flags;
    smp->add_option("manifest", smp_opt.manifest, "dataset manifest JSON")->required();
    smp->add_option("--id", smp_opt.id, "only this entry");
    smp->add_option("--out", smp_opt.out_dir, "output directory")->required();
    smp->add_option("--shard", smp_opt.shard, "max samples per archive");
    smp_flags.attach(smp);
    smp->callback([&]() {
        exit_code = mspline::cmd_sample(smp_opt, smp_flags.resolve(smp), std::cerr);
    });

    // bench
    auto* ben = app.add_subcommand("bench", "time operator construction and fit");
    mspline::BenchOptions ben_opt;
    CommonFlags ben_flags;
    ben->add_option("--frames", ben_opt.frames, "synthetic frame count");
    ben->add_option("--points", ben_opt.points, "synthetic point count");
    ben_flags.attach(ben);
    ben->callback([&]() {
        exit_code = mspline::cmd_bench(ben_opt, ben_flags.resolve(ben), std::cerr);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? mspline::kExitOk : mspline::kExitUsage;
    } catch (const mspline::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return mspline::kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return mspline::kExitUsage;
    }
    return exit_code;
}
