// ssal command-line toolkit: synthetic world generation, subsphere-law
// validation, sigmoid calibration, basis preparation, attacks, and report
// aggregation. Exit codes: 0 success, 1 contract/usage error, 2 I/O error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ssal/ssal.hpp"

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir)) throw ssal::IoError("cannot create directory " + dir.string());
}

void write_loss_trace_csv(const fs::path& path, const std::vector<double>& trace,
                          std::uint64_t fingerprint) {
  std::ofstream out(path);
  if (!out) throw ssal::IoError("cannot open " + path.string());
  out << "# fingerprint=" << fingerprint << "\niteration,loss\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    out << i << "," << ssal::format_double(trace[i]) << "\n";
  if (!out) throw ssal::IoError("short write to " + path.string());
}

std::vector<std::pair<double, double>> read_pair_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ssal::IoError("cannot open " + path.string());
  std::vector<std::pair<double, double>> pairs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw ssal::IoError("malformed pair row: " + line);
    try {
      pairs.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      if (pairs.empty() && line.find_first_not_of("0123456789.,+-eE ") != std::string::npos)
        continue;  // header row
      throw ssal::IoError("malformed pair row: " + line);
    }
  }
  return pairs;
}

struct ValidatePropArgs {
  long long d = 512, k = 128;
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  std::size_t bins = 64;
  std::string out = ".";
};

void run_validate_prop(const ValidatePropArgs& a) {
  ssal::Rng rng(a.seed);
  ssal::Histogram hist;
  ssal::BetaFitReport rep = ssal::validate_projection_law(a.d, a.k, a.n, rng, &hist, a.bins);
  std::uint64_t fp = ssal::fnv1a64("prop31|d=" + std::to_string(a.d) + "|k=" + std::to_string(a.k) +
                                   "|n=" + std::to_string(a.n) + "|seed=" + std::to_string(a.seed));
  ensure_dir(a.out);
  {
    std::ofstream out(fs::path(a.out) / "report.csv");
    if (!out) throw ssal::IoError("cannot open report.csv");
    out << "# fingerprint=" << fp << "\n"
        << "d,k,n,empirical_mean,empirical_mean_cos,theoretical_mean,ks_statistic,p_value\n"
        << a.d << "," << a.k << "," << a.n << "," << ssal::format_double(rep.empirical_mean)
        << "," << ssal::format_double(rep.empirical_mean_cos) << ","
        << ssal::format_double(rep.theoretical_mean) << ","
        << ssal::format_double(rep.ks_statistic) << "," << ssal::format_double(rep.p_value)
        << "\n";
    if (!out) throw ssal::IoError("short write to report.csv");
  }
  ssal::write_histogram_csv(fs::path(a.out) / "histogram.csv", hist, fp);
  std::cout << "d=" << a.d << " k=" << a.k << " n=" << a.n
            << " empirical_mean=" << rep.empirical_mean
            << " theoretical_mean=" << rep.theoretical_mean << " ks=" << rep.ks_statistic
            << " p=" << rep.p_value << "\n";
}

struct GenWorldArgs {
  ssal::WorldConfig cfg;
  std::string out;
  std::string attributes = "f";
};

void run_gen_world(GenWorldArgs& a) {
  a.cfg.attributes.clear();
  std::size_t pos = 0;
  while (pos <= a.attributes.size()) {
    auto comma = a.attributes.find(',', pos);
    std::string name = a.attributes.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!name.empty()) a.cfg.attributes.push_back(name);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  ssal::SyntheticWorld world = ssal::build_world(a.cfg);
  ensure_dir(a.out);
  ssal::save_world(a.out, world);
  std::cout << "world fingerprint=" << world.fingerprint << " dir=" << a.out << "\n";
}

struct GenOfsArgs {
  std::string world_dir;
  std::string model = "target";
  ssal::OfsConfig cfg;
  std::string out = "ofs_out";
};

void run_gen_ofs(const GenOfsArgs& a) {
  ssal::SyntheticWorld world = ssal::load_world(a.world_dir);
  const ssal::EmbeddingModel* model = &world.target.model;
  if (a.model != "target") {
    std::size_t idx = 0;
    try {
      idx = std::stoul(a.model);
    } catch (const std::exception&) {
      throw ssal::ConfigError("--model must be 'target' or a model index");
    }
    if (idx >= world.models.size()) throw ssal::ConfigError("model index out of range");
    model = &world.models[idx];
  }
  ssal::OfsResult res = ssal::generate_ofs(world, *model, a.cfg);
  ensure_dir(a.out);
  for (std::size_t i = 0; i < res.images.size(); ++i)
    ssal::write_vector(fs::path(a.out) / ("ofs_image_" + std::to_string(i) + ".vec"),
                       res.images[i], world.fingerprint);
  write_loss_trace_csv(fs::path(a.out) / "loss_trace.csv", res.loss_trace, world.fingerprint);
  ssal::KvFile kv;
  kv.set("fingerprint", std::to_string(world.fingerprint));
  kv.set("k", std::to_string(a.cfg.k));
  kv.set("final_loss", ssal::format_double(res.final_loss));
  kv.set("iterations", std::to_string(res.iterations));
  kv.set("gram_offdiag_max", ssal::format_double(res.gram_offdiag_max));
  ssal::write_kv(fs::path(a.out) / "ofs.txt", kv);
  std::cout << "k=" << a.cfg.k << " final_loss=" << res.final_loss
            << " iterations=" << res.iterations << " gram_offdiag_max=" << res.gram_offdiag_max
            << "\n";
}

struct FitSigmoidArgs {
  std::string pairs_file;
  std::string out = "sigmoid.txt";
  std::uint64_t seed = 1;
};

void run_fit_sigmoid(const FitSigmoidArgs& a) {
  auto pairs = read_pair_csv(a.pairs_file);
  ssal::Rng rng(a.seed);
  ssal::SigmoidFit fit = ssal::fit_sigmoid(pairs, rng);
  ssal::KvFile kv;
  kv.set("l_scale", ssal::format_double(fit.params.l_scale));
  kv.set("slope", ssal::format_double(fit.params.slope));
  kv.set("midpoint", ssal::format_double(fit.params.midpoint));
  kv.set("offset", ssal::format_double(fit.params.offset));
  kv.set("mae", ssal::format_double(fit.mae));
  ssal::write_kv(a.out, kv);
  std::cout << "mae=" << fit.mae << " out=" << a.out << "\n";
}

struct PrepareBasisArgs {
  std::string world_dir;
  std::string attribute = "f";
  long long k = 24;
  int n_samples = 200;
  std::uint64_t seed = 1;
  std::string out = "basis_out";
};

void run_prepare_basis(const PrepareBasisArgs& a) {
  ssal::SyntheticWorld world = ssal::load_world(a.world_dir);
  ssal::Rng root(a.seed);
  ssal::Rng pop_rng = root.split("cli/basis");
  auto pop = ssal::sample_population(world, a.attribute, a.n_samples, 1, pop_rng);
  std::vector<ssal::Vector> dataset;
  dataset.reserve(pop.size());
  for (auto& rec : pop) dataset.push_back(std::move(rec.image));
  ssal::AttributedBasisImages basis =
      ssal::prepare_basis(world, world.models.front(), a.attribute, dataset, a.k);
  ensure_dir(a.out);
  ssal::Matrix images(static_cast<Eigen::Index>(basis.images.size()), world.config.m);
  for (std::size_t i = 0; i < basis.images.size(); ++i)
    images.row(static_cast<Eigen::Index>(i)) = basis.images[i].transpose();
  ssal::write_matrix(fs::path(a.out) / "basis_images.mat", images, world.fingerprint);
  ssal::write_matrix(fs::path(a.out) / "features_local.mat", basis.feature_matrix_local.rows(),
                     world.fingerprint);
  ssal::KvFile kv;
  kv.set("fingerprint", std::to_string(world.fingerprint));
  kv.set("attribute", a.attribute);
  kv.set("k", std::to_string(a.k));
  kv.set("n_samples", std::to_string(a.n_samples));
  ssal::write_kv(fs::path(a.out) / "basis.txt", kv);
  std::cout << "k=" << a.k << " attribute=" << a.attribute << " out=" << a.out << "\n";
}

struct AttackArgs {
  std::string config_file;
  std::string mode;
  long long k = -1;
  int n_targets = -1;
  double eta = -1.0;
  long long d = -1, m = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int correction = -1;  // -1 unset, 0 off, 1 on
  std::string thresholds;
  std::string out;
};

void run_attack(const AttackArgs& a) {
  ssal::ExperimentConfig cfg;
  if (!a.config_file.empty()) cfg = ssal::load_experiment_config(a.config_file);
  if (!a.mode.empty()) cfg.attack.mode = a.mode;
  if (a.k > 0) cfg.attack.k = a.k;
  if (a.n_targets > 0) cfg.attack.n_targets = a.n_targets;
  if (a.eta >= 0.0) cfg.world.eta_model = a.eta;
  if (a.d > 0) cfg.world.d = a.d;
  if (a.m > 0) cfg.world.m = a.m;
  if (a.seed_set) cfg.seed = a.seed;
  if (a.correction >= 0) cfg.attack.use_correction = a.correction == 1;
  if (!a.thresholds.empty()) cfg.thresholds = ssal::parse_threshold_list(a.thresholds);
  if (!a.out.empty()) cfg.output_dir = a.out;
  ssal::ExperimentOutcome outcome = ssal::run_experiment_to_dir(cfg);
  std::cout << ssal::summary_csv_header() << "\n";
  for (const auto& s : outcome.summaries) std::cout << ssal::summary_csv_row(s) << "\n";
  std::cout << "crafting_queries=" << outcome.crafting_queries
            << " amortized_queries=" << outcome.amortized_queries << "\n";
}

struct ValidateBasisArgs {
  ssal::WorldConfig cfg;
  std::string variant = "attributed";
  int n = 10000;
  long long k = 24;
  double threshold_cos = 0.3420;
  std::uint64_t seed = 1;
  std::string out = "validate_out";
};

void run_validate_basis(const ValidateBasisArgs& a) {
  auto variant = ssal::parse_basis_variant(a.variant);
  if (!variant)
    throw ssal::ConfigError("--variant must be attributed, random_faces, or random_vectors");
  ssal::SyntheticWorld world = ssal::build_world(a.cfg);
  ssal::Rng root(a.seed);
  ssal::Rng rng = root.split("cli/validate-basis");
  ssal::BasisValidation val =
      ssal::validate_universal_basis(world, *variant, a.n, a.threshold_cos, rng, a.k);
  ensure_dir(a.out);
  ssal::write_histogram_csv(fs::path(a.out) / "distances.csv", val.histogram, world.fingerprint);
  ssal::KvFile kv;
  kv.set("fingerprint", std::to_string(world.fingerprint));
  kv.set("variant", a.variant);
  kv.set("n_samples", std::to_string(val.n_samples));
  kv.set("n_degenerate", std::to_string(val.n_degenerate));
  kv.set("threshold_cos", ssal::format_double(a.threshold_cos));
  kv.set("fraction_under_threshold", ssal::format_double(val.fraction_under_threshold));
  ssal::write_kv(fs::path(a.out) / "validation.txt", kv);
  std::cout << "variant=" << a.variant
            << " fraction_under_threshold=" << val.fraction_under_threshold << "\n";
}

struct ReportArgs {
  std::string dir;
  std::string out;
};

void run_report(const ReportArgs& a) {
  std::vector<fs::path> files;
  if (!fs::is_directory(a.dir)) throw ssal::IoError("report: not a directory: " + a.dir);
  for (const auto& entry : fs::recursive_directory_iterator(a.dir))
    if (entry.is_regular_file() && entry.path().filename() == "summary.csv")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ssal::IoError("report: no summary.csv files under " + a.dir);

  std::vector<ssal::MetricSummary> rows;
  std::uint64_t fp = 0;
  bool first = true;
  for (const fs::path& f : files) {
    ssal::SummaryFile sf = ssal::read_summary_csv(f);
    if (first) {
      fp = sf.fingerprint;
      first = false;
    } else if (sf.fingerprint != fp) {
      throw ssal::IoError("report: fingerprint mismatch between summaries (" + f.string() + ")");
    }
    for (auto& r : sf.rows) rows.push_back(std::move(r));
  }
  if (a.out.empty()) {
    std::cout << "# fingerprint=" << fp << "\n" << ssal::summary_csv_header() << "\n";
    for (const auto& r : rows) std::cout << ssal::summary_csv_row(r) << "\n";
  } else {
    ssal::write_summary_csv(a.out, rows, fp);
    std::cout << "rows=" << rows.size() << " out=" << a.out << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ssal: subsphere attack simulation toolkit"};
  app.require_subcommand(1);

  ValidatePropArgs vp;
  auto* c_vp = app.add_subcommand("validate-prop",
                                  "Monte-Carlo check of the projection-energy Beta law");
  c_vp->add_option("--d", vp.d, "ambient dimension")->required();
  c_vp->add_option("--k", vp.k, "subsphere dimension")->required();
  c_vp->add_option("--n", vp.n, "sample count");
  c_vp->add_option("--seed", vp.seed, "rng seed");
  c_vp->add_option("--bins", vp.bins, "histogram bins");
  c_vp->add_option("--out", vp.out, "output directory");

  GenWorldArgs gw;
  auto* c_gw = app.add_subcommand("gen-world", "build and save a synthetic world");
  c_gw->add_option("--d", gw.cfg.d, "feature dimension");
  c_gw->add_option("--m", gw.cfg.m, "image dimension");
  c_gw->add_option("--k-f", gw.cfg.k_f, "attribute subspace dimension");
  c_gw->add_option("--sigma-id", gw.cfg.sigma_id, "within-identity jitter");
  c_gw->add_option("--eta", gw.cfg.eta_model, "embedding noise scale");
  c_gw->add_option("--n-models", gw.cfg.n_models, "surrogate model count");
  c_gw->add_option("--rho", gw.cfg.rho, "attribute energy threshold");
  c_gw->add_option("--seed", gw.cfg.seed, "world seed");
  c_gw->add_option("--attributes", gw.attributes, "comma-separated attribute names");
  c_gw->add_option("--out", gw.out, "output directory")->required();

  GenOfsArgs go;
  auto* c_go = app.add_subcommand("gen-ofs", "generate an orthogonal face set");
  c_go->add_option("--world", go.world_dir, "world directory")->required();
  c_go->add_option("--model", go.model, "'target' or surrogate model index");
  c_go->add_option("--k", go.cfg.k, "set size")->required();
  c_go->add_option("--lr", go.cfg.learning_rate, "learning rate");
  c_go->add_option("--iters", go.cfg.max_iters, "max iterations");
  c_go->add_option("--tol", go.cfg.convergence_tol, "loss tolerance");
  c_go->add_option("--seed", go.cfg.seed, "rng seed");
  c_go->add_option("--out", go.out, "output directory");

  FitSigmoidArgs fsg;
  auto* c_fs = app.add_subcommand("fit-sigmoid", "fit a confidence curve from cosine,confidence pairs");
  c_fs->add_option("--pairs", fsg.pairs_file, "CSV of cosine,confidence rows")->required();
  c_fs->add_option("--out", fsg.out, "output key=value file");
  c_fs->add_option("--seed", fsg.seed, "restart jitter seed");

  PrepareBasisArgs pb;
  auto* c_pb = app.add_subcommand("prepare-basis", "PCA basis images for an attribute");
  c_pb->add_option("--world", pb.world_dir, "world directory")->required();
  c_pb->add_option("--attribute", pb.attribute, "attribute name");
  c_pb->add_option("--k", pb.k, "basis size");
  c_pb->add_option("--n-samples", pb.n_samples, "attributed dataset size");
  c_pb->add_option("--seed", pb.seed, "rng seed");
  c_pb->add_option("--out", pb.out, "output directory");

  AttackArgs at;
  auto* c_at = app.add_subcommand("attack", "run an attack experiment");
  c_at->add_option("--config", at.config_file, "experiment config file");
  c_at->add_option("--mode", at.mode, "white_box | black_box | transfer");
  c_at->add_option("--k", at.k, "basis size");
  c_at->add_option("--n-targets", at.n_targets, "number of targets");
  c_at->add_option("--eta", at.eta, "world embedding noise");
  c_at->add_option("--d", at.d, "feature dimension");
  c_at->add_option("--m", at.m, "image dimension");
  auto* seed_opt = c_at->add_option("--seed", at.seed, "experiment seed");
  auto* corr_flag = c_at->add_flag("--use-correction", "apply the correction matrix");
  auto* nocorr_flag = c_at->add_flag("--no-correction", "skip the correction matrix");
  c_at->add_option("--thresholds", at.thresholds, "e.g. best_accuracy,far:0.001,default");
  c_at->add_option("--out", at.out, "output directory");

  ValidateBasisArgs vb;
  auto* c_vb = app.add_subcommand("validate-basis", "cross-model interpolation consistency");
  c_vb->add_option("--d", vb.cfg.d, "feature dimension");
  c_vb->add_option("--m", vb.cfg.m, "image dimension");
  c_vb->add_option("--k-f", vb.cfg.k_f, "attribute subspace dimension");
  c_vb->add_option("--eta", vb.cfg.eta_model, "embedding noise scale");
  c_vb->add_option("--n-models", vb.cfg.n_models, "model count (needs >= 3)");
  c_vb->add_option("--world-seed", vb.cfg.seed, "world seed");
  c_vb->add_option("--variant", vb.variant, "attributed | random_faces | random_vectors");
  c_vb->add_option("--n", vb.n, "score vector count");
  c_vb->add_option("--k", vb.k, "basis size");
  c_vb->add_option("--threshold-cos", vb.threshold_cos, "acceptance cosine");
  c_vb->add_option("--seed", vb.seed, "sampling seed");
  c_vb->add_option("--out", vb.out, "output directory");

  ReportArgs rp;
  auto* c_rp = app.add_subcommand("report", "aggregate summary.csv files");
  c_rp->add_option("--dir", rp.dir, "directory to scan")->required();
  c_rp->add_option("--out", rp.out, "output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
    if (c_vp->parsed()) run_validate_prop(vp);
    if (c_gw->parsed()) run_gen_world(gw);
    if (c_go->parsed()) run_gen_ofs(go);
    if (c_fs->parsed()) run_fit_sigmoid(fsg);
    if (c_pb->parsed()) run_prepare_basis(pb);
    if (c_at->parsed()) {
      at.seed_set = seed_opt->count() > 0;
      if (corr_flag->count() > 0 && nocorr_flag->count() > 0)
        throw ssal::ConfigError("--use-correction and --no-correction are exclusive");
      if (corr_flag->count() > 0) at.correction = 1;
      if (nocorr_flag->count() > 0) at.correction = 0;
      run_attack(at);
    }
    if (c_vb->parsed()) run_validate_basis(vb);
    if (c_rp->parsed()) run_report(rp);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 1;
  } catch (const ssal::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const ssal::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
