// covercraft command-line front-end: dataset generation, cover learning,
// nerve export, barcodes, homology recovery quotients, and benchmark suites.
//
// Every command that writes artifacts also writes a run manifest; `rerun`
// replays a manifest and reproduces the artifacts byte-for-byte.

#include "covercraft/covercraft.hpp"
#include "covercraft/toml_lite.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace covercraft;

namespace {

constexpr const char* kVersion = "0.1.0";

void write_text_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::invalid_argument("cannot write file: " + path);
        out << content;
    }
    fs::rename(tmp, target);
}

void write_manifest(const std::string& command, const json& params,
                    const std::vector<std::string>& input_paths,
                    const std::vector<std::string>& output_paths, const std::string& manifest_path) {
    json m;
    m["tool"] = "covercraft";
    m["version"] = kVersion;
    m["command"] = command;
    m["params"] = params;
    json inputs = json::object();
    for (const auto& p : input_paths) inputs[p] = fnv1a_file_hash(p);
    m["inputs"] = inputs;
    m["outputs"] = output_paths;
    write_text_atomic(manifest_path, m.dump(2) + "\n");
}

std::vector<int> parse_betti(const std::string& spec) {
    std::vector<int> betti;
    std::string cur;
    for (char c : spec + ",") {
        if (c == ',') {
            if (!cur.empty()) betti.push_back(static_cast<int>(parse_double(cur)));
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    if (betti.empty()) throw std::invalid_argument("empty --betti specification");
    return betti;
}

std::vector<std::string> load_labels_csv(const std::string& path, int expected_n) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open labels file: " + path);
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.find(',') != std::string::npos)
            throw std::invalid_argument("labels file must have a single column");
        labels.push_back(line);
    }
    if (static_cast<int>(labels.size()) != expected_n)
        throw std::invalid_argument("labels row count does not match point count");
    return labels;
}

// ---------------------------------------------------------------------------
// Command handlers; each takes fully-resolved params so `rerun` can replay it.
// ---------------------------------------------------------------------------

void run_gen(const json& p) {
    const std::string kind = p.at("kind");
    const int n = p.at("n");
    const std::uint64_t seed = p.at("seed");
    const std::string out = p.at("out");
    PointCloud X;
    if (kind == "sphere2") X = sample_sphere(2, n, seed);
    else if (kind == "sphere3") X = sample_sphere(3, n, seed);
    else if (kind == "circle") X = sample_circle(n, seed);
    else if (kind == "blobs") X = sample_blobs(n, seed);
    else throw std::invalid_argument("gen: unknown kind '" + kind + "' (sphere2|sphere3|circle|blobs)");
    std::ostringstream buf;
    save_point_cloud_csv(X, buf);
    write_text_atomic(out, buf.str());
    write_manifest("gen", p, {}, {out}, out + ".manifest.json");
}

LearnConfig learn_config_from(const json& p) {
    LearnConfig cfg;
    cfg.n_cov = p.at("n_cov");
    cfg.n_neigh = p.at("n_neigh");
    cfg.reg = p.at("reg");
    cfg.lr = p.at("lr");
    cfg.n_epoch = p.at("n_epoch");
    cfg.p = p.at("p");
    cfg.seed = p.at("seed");
    cfg.big_step = p.at("big_step");
    cfg.graph_kind = p.at("graph") == "unit" ? GraphKind::unit_knn : GraphKind::umap;
    cfg.validate();
    return cfg;
}

void run_cover(const json& p) {
    const std::string in = p.at("in");
    const std::string out_dir = p.at("out_dir");
    const PointCloud X = load_point_cloud_csv(in);
    const LearnConfig cfg = learn_config_from(p);
    auto [cover, trace] = shape_discover(X, cfg);

    std::ostringstream cover_buf;
    save_fuzzy_cover_csv(cover, cover_buf);
    const std::string cover_path = (fs::path(out_dir) / "cover.csv").string();
    write_text_atomic(cover_path, cover_buf.str());

    std::ostringstream trace_buf;
    for (const auto& e : trace.history) {
        json line;
        line["m"] = e.m;
        line["g"] = e.g_loss;
        line["t0"] = e.t0;
        line["r"] = e.r;
        line["total"] = e.total;
        trace_buf << line.dump() << '\n';
    }
    const std::string trace_path = (fs::path(out_dir) / "trace.jsonl").string();
    write_text_atomic(trace_path, trace_buf.str());

    write_manifest("cover", p, {in}, {cover_path, trace_path},
                   (fs::path(out_dir) / "manifest.json").string());
    std::cout << "epochs=" << trace.epochs_run << " graph_s=" << fmt_double(trace.graph_seconds)
              << " init_s=" << fmt_double(trace.init_seconds)
              << " optimize_s=" << fmt_double(trace.optimize_seconds) << '\n';
}

// Accepts a fuzzy cover CSV or a cover JSON as the nerve source.
Cover load_cover_input(const std::string& path, double lambda) {
    std::ifstream probe(path);
    if (!probe) throw std::invalid_argument("cannot open cover input: " + path);
    char first = 0;
    probe >> first;
    probe.close();
    if (first == '{') {
        std::ifstream in(path);
        return load_cover_json(in);
    }
    return threshold(load_fuzzy_cover_csv(path), lambda);
}

void run_nerve(const json& p) {
    const std::string in = p.at("in");
    const std::string out = p.at("out");
    const std::string format = p.at("format");
    const double lambda = p.at("lambda");
    const int max_dim = p.at("max_dim");
    if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("nerve: lambda must be in [0,1)");
    const Cover c = load_cover_input(in, lambda);
    const SimplicialComplex K = nerve(c, max_dim);
    std::vector<std::string> inputs{in};
    std::ostringstream buf;
    if (format == "dot" || format == "graphml") {
        std::vector<std::string> labels;
        const bool have_labels = p.contains("labels") && !p.at("labels").get<std::string>().empty();
        if (have_labels) {
            labels = load_labels_csv(p.at("labels"), c.n);
            inputs.push_back(p.at("labels"));
        }
        if (format == "dot")
            save_nerve_dot(K, c, buf, have_labels ? &labels : nullptr);
        else
            save_nerve_graphml(K, c, buf, have_labels ? &labels : nullptr);
    } else if (format == "json") {
        FilteredComplex F;
        for (const auto& s : K.simplices) F.simplices.emplace_back(s, 0.0);
        save_filtered_complex_json(F, buf);
    } else {
        throw std::invalid_argument("nerve: unknown format '" + format + "' (dot|graphml|json)");
    }
    write_text_atomic(out, buf.str());
    write_manifest("nerve", p, inputs, {out}, out + ".manifest.json");
}

void run_barcode(const json& p) {
    const std::string source = p.at("source");
    const std::string in = p.at("in");
    const std::string out = p.at("out");
    const int max_dim = p.at("max_dim");
    const int max_hom_dim = p.at("max_hom_dim");

    FilteredComplex K;
    if (source == "fuzzy-nerve") {
        K = fuzzy_nerve_filtration(load_fuzzy_cover_csv(in), max_dim);
    } else if (source == "rips") {
        const PointCloud X = load_point_cloud_csv(in);
        double radius = p.at("max_radius");
        if (radius < 0.0) radius = detail::enclosing_radius(X);
        K = vietoris_rips(X, max_dim, radius);
    } else if (source == "witness") {
        const PointCloud X = load_point_cloud_csv(in);
        const std::uint64_t seed = p.at("seed");
        std::vector<int> landmarks;
        const double eps = p.at("eps");
        const int n_landmarks = p.at("landmarks");
        if (eps > 0.0)
            landmarks = epsilon_net(X, eps, seed);
        else if (n_landmarks > 0)
            landmarks = furthest_point_subsample(X, n_landmarks, seed);
        else
            throw std::invalid_argument("barcode witness: give --eps or --landmarks");
        K = witness_v0(X, landmarks, max_dim);
        if (p.at("verify").get<bool>()) {
            if (!(eps > 0.0)) throw std::invalid_argument("--verify needs --eps (net landmarks)");
            const SimplicialComplex wit_at_eps = K.sublevel(eps);
            const SimplicialComplex bm_nerve = nerve(ball_mapper(X, eps, seed), max_dim);
            if (wit_at_eps.simplices != bm_nerve.simplices)
                throw std::runtime_error("verify: witness eps-sublevel differs from Ball Mapper nerve");
            std::cout << "verify: witness(v=0) at eps equals Ball Mapper nerve ("
                      << bm_nerve.simplices.size() << " simplices)\n";
        }
    } else {
        throw std::invalid_argument("barcode: unknown source '" + source + "' (fuzzy-nerve|rips|witness)");
    }
    const Barcode bc = reduce_barcode(K, max_hom_dim);
    std::ostringstream buf;
    save_barcode_csv(bc, buf);
    write_text_atomic(out, buf.str());
    write_manifest("barcode", p, {in}, {out}, out + ".manifest.json");
}

void run_hrq(const json& p) {
    const std::string in = p.at("in");
    BettiTarget target{parse_betti(p.at("betti"))};
    std::ifstream bin(in);
    if (!bin) throw std::invalid_argument("cannot open barcode: " + in);
    const Barcode bc = load_barcode_csv(bin);
    const auto res = homology_recovery_quotient_full(bc, target);
    std::cout << fmt_double(res.quotient) << '\n';
    if (res.degenerate_window)
        std::cerr << "warning: degenerate window (no finite bars or b <= a); quotient is 0\n";
    if (p.contains("out") && !p.at("out").get<std::string>().empty()) {
        const std::string out = p.at("out");
        std::string row = "target,quotient\n";
        std::string tgt;
        for (std::size_t i = 0; i < target.betti.size(); ++i) {
            if (i) tgt += ';';
            tgt += std::to_string(target.betti[i]);
        }
        row += tgt + "," + fmt_double(res.quotient) + "\n";
        write_text_atomic(out, row);
        write_manifest("hrq", p, {in}, {out}, out + ".manifest.json");
    }
}

void run_bench(const json& p) {
    const std::string suite_path = p.at("suite");
    const std::string out = p.at("out");
    const auto doc = toml::parse_file(suite_path);
    const auto& suite = doc.tables.count("suite") ? doc.tables.at("suite") : toml::Table{};
    const std::uint64_t seed = static_cast<std::uint64_t>(suite.get_int("seed", 0));
    const int runs = static_cast<int>(suite.get_int("runs", 3));
    auto cells_it = doc.table_arrays.find("cell");
    if (cells_it == doc.table_arrays.end() || cells_it->second.empty())
        throw std::invalid_argument("bench suite has no [[cell]] entries");

    std::string results = "method,dataset,vertices,simplices,quotient\n";
    std::string timings = "method,dataset,graph_s,init_s,optimize_s,barcode_s,total_s\n";
    for (const auto& cell : cells_it->second) {
        DatasetSpec ds;
        ds.kind = cell.at("dataset").as_string();
        ds.n = static_cast<int>(cell.get_int("n", 0));
        ds.path = cell.get_string("path", "");
        MethodSpec ms;
        ms.kind = cell.at("method").as_string();
        ms.learn.n_neigh = static_cast<int>(cell.get_int("n_neigh", 15));
        ms.learn.reg = cell.get_double("reg", 10.0);
        ms.learn.lr = cell.get_double("lr", 0.1);
        ms.learn.n_epoch = static_cast<int>(cell.get_int("n_epoch", 500));
        ms.learn.p = cell.get_double("p", 5.0);
        ms.learn.graph_kind = cell.get_string("graph", "umap") == "unit" ? GraphKind::unit_knn : GraphKind::umap;
        ms.learn.max_dim = static_cast<int>(cell.get_int("max_dim", 2));
        ms.complex_max_dim = static_cast<int>(cell.get_int("complex_max_dim", -1));
        const int budget = static_cast<int>(cell.at("budget").as_int());
        BettiTarget target;
        for (const auto& v : cell.at("betti").as_array()) target.betti.push_back(static_cast<int>(v.as_int()));
        const HarnessReport rep = inference_harness(ds, ms, budget, target, seed, runs);
        results += rep.method + "," + rep.dataset + "," + std::to_string(rep.vertices) + "," +
                   std::to_string(rep.simplices) + "," + fmt_double(rep.quotient) + "\n";
        timings += rep.method + "," + rep.dataset + "," + fmt_double(rep.graph_seconds) + "," +
                   fmt_double(rep.init_seconds) + "," + fmt_double(rep.optimize_seconds) + "," +
                   fmt_double(rep.barcode_seconds) + "," + fmt_double(rep.total_seconds) + "\n";
    }
    write_text_atomic(out, results);
    // wall-clock sidecar; not a manifest artifact since timings are not reproducible
    write_text_atomic(out + ".timings.csv", timings);
    write_manifest("bench", p, {suite_path}, {out}, out + ".manifest.json");
}

void dispatch(const std::string& command, const json& params) {
    if (command == "gen") run_gen(params);
    else if (command == "cover") run_cover(params);
    else if (command == "nerve") run_nerve(params);
    else if (command == "barcode") run_barcode(params);
    else if (command == "hrq") run_hrq(params);
    else if (command == "bench") run_bench(params);
    else throw std::invalid_argument("unknown command in manifest: " + command);
}

void run_rerun(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw std::invalid_argument("cannot open manifest: " + manifest_path);
    const json m = json::parse(in);
    for (auto it = m.at("inputs").begin(); it != m.at("inputs").end(); ++it) {
        const std::string current = fnv1a_file_hash(it.key());
        if (current != it.value().get<std::string>())
            std::cerr << "warning: input " << it.key() << " changed since the manifest was written\n";
    }
    dispatch(m.at("command"), m.at("params"));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"covercraft: optimization-based cover learning for point clouds"};
    app.require_subcommand(1);

    // gen
    std::string gen_kind, gen_out;
    int gen_n = 1000;
    std::uint64_t gen_seed = 0;
    auto* gen = app.add_subcommand("gen", "generate a synthetic point cloud CSV");
    gen->add_option("kind", gen_kind, "sphere2|sphere3|circle|blobs")->required();
    gen->add_option("n", gen_n, "number of points")->required();
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--out", gen_out, "output CSV path")->required();

    // cover
    std::string cover_in, cover_out_dir, cover_graph = "umap";
    int cover_ncov = 4, cover_nneigh = 15, cover_nepoch = 500, cover_bigstep = 1;
    double cover_reg = 10.0, cover_lr = 0.1, cover_p = 5.0;
    std::uint64_t cover_seed = 0;
    auto* cover = app.add_subcommand("cover", "learn a fuzzy cover with ShapeDiscover");
    cover->add_option("in", cover_in, "input point cloud CSV")->required();
    cover->add_option("--out-dir", cover_out_dir, "output directory")->required();
    cover->add_option("--n-cov", cover_ncov, "number of cover elements");
    cover->add_option("--n-neigh", cover_nneigh, "neighborhood size");
    cover->add_option("--reg", cover_reg, "regularization weight");
    cover->add_option("--lr", cover_lr, "Adam learning rate");
    cover->add_option("--n-epoch", cover_nepoch, "gradient descent epochs");
    cover->add_option("--p", cover_p, "pi_p approximation parameter");
    cover->add_option("--seed", cover_seed, "RNG seed");
    cover->add_option("--graph", cover_graph, "unit|umap neighborhood graph");
    cover->add_option("--big-step", cover_bigstep, "recompute persistence every s epochs");

    // nerve
    std::string nerve_in, nerve_out, nerve_format = "dot", nerve_labels;
    double nerve_lambda = 0.5;
    int nerve_max_dim = 2;
    auto* nrv = app.add_subcommand("nerve", "threshold a cover and export its nerve");
    nrv->add_option("in", nerve_in, "fuzzy cover CSV or cover JSON")->required();
    nrv->add_option("--out", nerve_out, "output path")->required();
    nrv->add_option("--lambda", nerve_lambda, "threshold in [0,1)");
    nrv->add_option("--max-dim", nerve_max_dim, "maximum nerve dimension");
    nrv->add_option("--format", nerve_format, "dot|graphml|json");
    nrv->add_option("--labels", nerve_labels, "per-point label CSV for vertex histograms");

    // barcode
    std::string bc_source, bc_in, bc_out;
    int bc_max_dim = 2, bc_max_hom_dim = 1, bc_landmarks = 0;
    double bc_max_radius = -1.0, bc_eps = 0.0;
    std::uint64_t bc_seed = 0;
    bool bc_verify = false;
    auto* bar = app.add_subcommand("barcode", "compute a persistence barcode CSV");
    bar->add_option("--source", bc_source, "fuzzy-nerve|rips|witness")->required();
    bar->add_option("in", bc_in, "input file (fuzzy cover CSV or point CSV)")->required();
    bar->add_option("--out", bc_out, "output barcode CSV")->required();
    bar->add_option("--max-dim", bc_max_dim, "maximum simplex dimension");
    bar->add_option("--max-hom-dim", bc_max_hom_dim, "maximum homology dimension");
    bar->add_option("--max-radius", bc_max_radius, "Rips truncation radius (default: enclosing radius)");
    bar->add_option("--landmarks", bc_landmarks, "witness: furthest-point landmark count");
    bar->add_option("--eps", bc_eps, "witness: eps-net landmark scale");
    bar->add_option("--seed", bc_seed, "RNG seed for landmark selection");
    bar->add_flag("--verify", bc_verify, "witness: check equality with the Ball Mapper nerve at eps");

    // hrq
    std::string hrq_in, hrq_betti, hrq_out;
    auto* hr = app.add_subcommand("hrq", "homology recovery quotient of a barcode");
    hr->add_option("in", hrq_in, "barcode CSV")->required();
    hr->add_option("--betti", hrq_betti, "target Betti numbers, e.g. \"1,0,1\"")->required();
    hr->add_option("--out", hrq_out, "optional CSV row output");

    // bench
    std::string bench_suite, bench_out;
    auto* bench = app.add_subcommand("bench", "run an inference-harness suite from TOML");
    bench->add_option("suite", bench_suite, "suite TOML file")->required();
    bench->add_option("--out", bench_out, "output results CSV")->required();

    // rerun
    std::string rerun_manifest;
    auto* rr = app.add_subcommand("rerun", "replay a command from its run manifest");
    rr->add_option("manifest", rerun_manifest, "manifest JSON path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) {
            run_gen({{"kind", gen_kind}, {"n", gen_n}, {"seed", gen_seed}, {"out", gen_out}});
        } else if (cover->parsed()) {
            run_cover({{"in", cover_in},
                       {"out_dir", cover_out_dir},
                       {"n_cov", cover_ncov},
                       {"n_neigh", cover_nneigh},
                       {"reg", cover_reg},
                       {"lr", cover_lr},
                       {"n_epoch", cover_nepoch},
                       {"p", cover_p},
                       {"seed", cover_seed},
                       {"graph", cover_graph},
                       {"big_step", cover_bigstep}});
        } else if (nrv->parsed()) {
            run_nerve({{"in", nerve_in},
                       {"out", nerve_out},
                       {"format", nerve_format},
                       {"lambda", nerve_lambda},
                       {"max_dim", nerve_max_dim},
                       {"labels", nerve_labels}});
        } else if (bar->parsed()) {
            run_barcode({{"source", bc_source},
                         {"in", bc_in},
                         {"out", bc_out},
                         {"max_dim", bc_max_dim},
                         {"max_hom_dim", bc_max_hom_dim},
                         {"max_radius", bc_max_radius},
                         {"landmarks", bc_landmarks},
                         {"eps", bc_eps},
                         {"seed", bc_seed},
                         {"verify", bc_verify}});
        } else if (hr->parsed()) {
            run_hrq({{"in", hrq_in}, {"betti", hrq_betti}, {"out", hrq_out}});
        } else if (bench->parsed()) {
            run_bench({{"suite", bench_suite}, {"out", bench_out}});
        } else if (rr->parsed()) {
            run_rerun(rerun_manifest);
        }
    } catch (const capacity_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
