// metaradon-cli: every pipeline stage as a subcommand.
//
// Option precedence: command-line flag > --config key=value file > built-in default.
// Exit codes: 0 success, 2 validation, 3 I/O, 1 internal error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "metaradon/metaradon.h"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace cli;

namespace {

struct Options {
  int threads = 0;
  std::string config;
  std::uint64_t seed = 0;
  bool strict_seed = false;
  std::string manifest;

  struct {
    std::string in, out, csv, preview, method = "rotate";
    int angles = 180;
    int detectors = 0;
    double lo = 0.0, hi = 180.0;
  } radon;

  struct {
    std::string in, out, report, algo = "sart", order = "sequential", filter = "ram-lak";
    int width = 0, height = 0, iters = 100, depth = 8;
    double relax = 1.0;
    bool nonneg = false, clamp = false;
    std::vector<int> snapshots{1, 20, 100, 150};
  } recon;

  struct {
    double wavelength = 780e-9, focal = 0.0, period = 330e-9;
    std::string aperture, profile = "cyl", library, out, residuals;
    int synthetic = 0;
  } lens;

  struct {
    int scene_size = 968, angles = 91, pool = 3, sart_iters = 20, detectors = 0;
    std::string glyph = "4x7", outdir, recon = "fbp", filter = "ram-lak";
  } bench;

  struct {
    std::string mnist = "data/mnist", data, domain = "radon", method = "ray";
    std::string translate = "0.10,0.30", scale = "0.80,1.20";
    int n_train = 5000, n_test = 1000, pad = 14, dim = 64, angles = 23;
    bool augment = true, augment_test = true;
    double rot = 50.0, noise = 0.05;
  } ds;

  struct {
    int epochs = 30, batch = 64;
    double lr = 0.05, l2 = 1e-4, val_frac = 0.1;
    std::string out, confusion, heatmap, loss;
  } train;

  struct {
    std::string model, split = "test", confusion, heatmap, report;
  } eval;
};

void add_dataset_flags(CLI::App* sub, Options& o) {
  sub->add_option("--mnist", o.ds.mnist, "Directory holding the four MNIST IDX files");
  sub->add_option("--data", o.ds.data, "Feature CSV (label,f0,f1,...) used instead of MNIST");
  sub->add_option("--n-train", o.ds.n_train, "Training images drawn from MNIST train");
  sub->add_option("--n-test", o.ds.n_test, "Test images drawn from MNIST t10k");
  sub->add_option("--pad", o.ds.pad, "Zero padding before resizing");
  sub->add_option("--dim", o.ds.dim, "Target image side in pixels");
  sub->add_option("--angles", o.ds.angles, "Projection angles per sinogram");
  sub->add_flag("--augment,!--no-augment", o.ds.augment, "Random affine augmentation");
  sub->add_flag("--augment-test,!--no-augment-test", o.ds.augment_test,
                "Augment the test split as well");
  sub->add_option("--rot", o.ds.rot, "Rotation range in degrees (uniform in [-rot, rot])");
  sub->add_option("--translate", o.ds.translate, "Translation magnitude range lo,hi");
  sub->add_option("--scale", o.ds.scale, "Scale range lo,hi");
  sub->add_option("--noise", o.ds.noise, "Gaussian noise std as a fraction of [0,1]");
  sub->add_option("--domain", o.ds.domain, "Feature domain")->check(CLI::IsMember({"radon", "pixel"}));
  sub->add_option("--method", o.ds.method, "Projector")->check(CLI::IsMember({"rotate", "ray", "fftdc"}));
}

std::unique_ptr<CLI::App> build_app(Options& o, bool strict) {
  auto app = std::make_unique<CLI::App>("Meta-optical Radon imaging pipeline", "metaradon-cli");
  app->set_version_flag("--version", std::string("metaradon-cli ") + mr_version() +
                                         "\nformats: " + mr_format_versions());
  app->require_subcommand(1);
  app->fallthrough();
  app->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app->add_option("--config", o.config, "Plain-text key=value defaults file");
  app->add_option("--seed", o.seed, "Seed for randomized stages");
  app->add_flag("--strict-seed", o.strict_seed, "Fail unless randomized stages get an explicit seed");
  app->add_option("--manifest", o.manifest, "Run manifest path (default derived from the output)");

  auto* r = app->add_subcommand("radon", "Project an image into a sinogram");
  r->add_option("--in", o.radon.in, "Input PGM")->required(strict);
  r->add_option("--out", o.radon.out, "Output RSG1 sinogram")->required(strict);
  r->add_option("--angles", o.radon.angles, "Number of angles");
  r->add_option("--lo", o.radon.lo, "First angle in degrees");
  r->add_option("--hi", o.radon.hi, "Exclusive upper angle in degrees");
  r->add_option("--method", o.radon.method, "Projector")->check(CLI::IsMember({"rotate", "ray", "fftdc"}));
  r->add_option("--detectors", o.radon.detectors, "Detector bins (0 = cover the diagonal)");
  r->add_option("--csv", o.radon.csv, "Also write the sinogram as CSV");
  r->add_option("--preview", o.radon.preview, "Also write the sinogram as a normalized PGM");

  auto* rc = app->add_subcommand("reconstruct", "Reconstruct an image from a sinogram");
  rc->add_option("--in", o.recon.in, "Input RSG1 sinogram")->required(strict);
  rc->add_option("--out", o.recon.out, "Output PGM")->required(strict);
  rc->add_option("--algo", o.recon.algo, "Algorithm")->check(CLI::IsMember({"sart", "fbp"}));
  rc->add_option("--iters", o.recon.iters, "SART iterations");
  rc->add_option("--relax", o.recon.relax, "SART relaxation in (0, 2)");
  rc->add_option("--order", o.recon.order, "Angle order")->check(CLI::IsMember({"sequential", "shuffled"}));
  rc->add_flag("--nonneg", o.recon.nonneg, "Clamp negative values after each update");
  rc->add_option("--snapshots", o.recon.snapshots, "Iterations to save as <stem>_iterNNN.pgm")
      ->delimiter(',');
  rc->add_option("--filter", o.recon.filter, "FBP filter")
      ->check(CLI::IsMember({"ram-lak", "ramlak", "shepp-logan", "none"}));
  rc->add_option("--report", o.recon.report, "SART residual CSV");
  rc->add_option("--width", o.recon.width, "Image width (0 = infer from detectors)");
  rc->add_option("--height", o.recon.height, "Image height (0 = infer from detectors)");
  rc->add_option("--depth", o.recon.depth, "PGM bit depth")->check(CLI::IsMember({8, 16}));
  rc->add_flag("--clamp", o.recon.clamp, "Saturate values outside [0,1] when writing");

  auto* dl = app->add_subcommand("design-lens", "Quantize a metalens phase profile to pillars");
  dl->add_option("--wavelength", o.lens.wavelength, "Design wavelength in m");
  dl->add_option("--focal", o.lens.focal, "Focal length in m")->required(strict);
  dl->add_option("--aperture", o.lens.aperture, "Aperture WxH in m")->required(strict);
  dl->add_option("--period", o.lens.period, "Lattice period in m");
  dl->add_option("--profile", o.lens.profile, "Phase profile")
      ->check(CLI::IsMember({"cyl", "cylindrical", "hyp", "hyperboloid"}));
  dl->add_option("--library", o.lens.library, "Pillar library CSV");
  dl->add_option("--synthetic", o.lens.synthetic, "Use an n-entry synthetic library instead");
  dl->add_option("--out", o.lens.out, "Layout CSV")->required(strict);
  dl->add_option("--residuals", o.lens.residuals, "Residual phase map PGM");

  auto* b = app->add_subcommand("bench", "Radon versus average-pool compression study");
  b->add_option("--scene-size", o.bench.scene_size, "Scene side in pixels");
  b->add_option("--glyph", o.bench.glyph, "Glyph size WxH");
  b->add_option("--angles", o.bench.angles, "Projection angles");
  b->add_option("--pool", o.bench.pool, "Pooling kernel");
  b->add_option("--recon", o.bench.recon, "Radon reconstruction")->check(CLI::IsMember({"fbp", "sart"}));
  b->add_option("--filter", o.bench.filter, "FBP filter")
      ->check(CLI::IsMember({"ram-lak", "ramlak", "shepp-logan", "none"}));
  b->add_option("--sart-iters", o.bench.sart_iters, "SART iterations");
  b->add_option("--detectors", o.bench.detectors, "Detector bins (0 = scene width)");
  b->add_option("--outdir", o.bench.outdir, "Output directory")->required(strict);

  auto* c = app->add_subcommand("classify", "Linear classifier on Radon features");
  c->require_subcommand(1);
  c->fallthrough();
  auto* tr = c->add_subcommand("train", "Train and validate on a seeded 90/10 split");
  add_dataset_flags(tr, o);
  tr->add_option("--epochs", o.train.epochs, "SGD epochs");
  tr->add_option("--lr", o.train.lr, "Learning rate");
  tr->add_option("--l2", o.train.l2, "L2 penalty");
  tr->add_option("--batch", o.train.batch, "Minibatch size");
  tr->add_option("--val-frac", o.train.val_frac, "Held-out validation fraction");
  tr->add_option("--out", o.train.out, "Model file (RCM1)")->required(strict);
  tr->add_option("--confusion", o.train.confusion, "Validation confusion CSV");
  tr->add_option("--heatmap", o.train.heatmap, "Validation confusion PGM");
  tr->add_option("--loss", o.train.loss, "Per-epoch loss CSV");
  auto* ev = c->add_subcommand("eval", "Evaluate a trained model");
  add_dataset_flags(ev, o);
  ev->add_option("--model", o.eval.model, "Model file (RCM1)")->required(strict);
  ev->add_option("--split", o.eval.split, "MNIST split")->check(CLI::IsMember({"train", "test"}));
  ev->add_option("--confusion", o.eval.confusion, "Confusion CSV");
  ev->add_option("--heatmap", o.eval.heatmap, "Confusion PGM");
  ev->add_option("--report", o.eval.report, "Accuracy JSON");
  return app;
}

// Active subcommand chain, outermost first.
std::vector<CLI::App*> active_chain(CLI::App* app) {
  std::vector<CLI::App*> chain{app};
  while (true) {
    auto subs = chain.back()->get_subcommands();
    if (subs.empty()) break;
    chain.push_back(subs.front());
  }
  return chain;
}

std::vector<std::string> config_args(const std::vector<CLI::App*>& chain,
                                     const std::map<std::string, std::string>& cfg) {
  std::vector<std::string> extra;
  for (auto* a : chain) {
    for (auto* opt : a->get_options()) {
      if (opt->count() > 0) continue;
      for (const auto& name : opt->get_lnames()) {
        if (name == "config" || name == "version" || name == "help") continue;
        auto it = cfg.find(name);
        if (it == cfg.end()) continue;
        extra.push_back("--" + name + "=" + it->second);
        break;
      }
    }
  }
  return extra;
}

mr_radon_method parse_method(const std::string& m) {
  if (m == "rotate") return MR_RADON_ROTATE;
  if (m == "ray") return MR_RADON_RAY;
  if (m == "fftdc") return MR_RADON_FFTDC;
  validation("unknown projector '" + m + "'");
}

mr_fbp_filter parse_filter(const std::string& f) {
  if (f == "ram-lak" || f == "ramlak") return MR_FILTER_RAMLAK;
  if (f == "shepp-logan") return MR_FILTER_SHEPP_LOGAN;
  if (f == "none") return MR_FILTER_NONE;
  validation("unknown filter '" + f + "'");
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  return p.parent_path() / (p.stem().string() + suffix);
}

fs::path manifest_path(const Options& o, const fs::path& fallback) {
  return o.manifest.empty() ? fs::path(fallback.string() + ".manifest.json") : fs::path(o.manifest);
}

void require_input(const std::string& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) io_error("input file not found: " + path);
}

Image load_image(const std::string& path) {
  require_input(path);
  mr_image* p = nullptr;
  check(mr_image_load(path.c_str(), &p));
  return Image(p);
}

int run_radon(const Options& o, Manifest& man) {
  const auto& r = o.radon;
  Image img = load_image(r.in);
  man.add_input(r.in);
  if (r.angles < 1) validation("--angles must be >= 1");
  std::vector<double> angles(static_cast<std::size_t>(r.angles));
  check(mr_uniform_angles(r.angles, r.lo, r.hi, angles.data()));
  mr_sinogram* s = nullptr;
  check(mr_radon(img.get(), angles.data(), r.angles, r.detectors, parse_method(r.method), &s));
  Sinogram sino(s);
  check(mr_sinogram_save(sino.get(), r.out.c_str()));
  man.add_output(r.out);
  if (!r.csv.empty()) {
    check(mr_sinogram_save_csv(sino.get(), r.csv.c_str()));
    man.add_output(r.csv);
  }
  if (!r.preview.empty()) {
    mr_image* pv = nullptr;
    check(mr_sinogram_to_image(sino.get(), &pv));
    Image preview(pv);
    check(mr_image_save(preview.get(), r.preview.c_str(), 16, 0));
    man.add_output(r.preview);
  }
  std::printf("sinogram: %d angles x %d detectors -> %s\n", mr_sinogram_n_angles(sino.get()),
              mr_sinogram_n_detectors(sino.get()), r.out.c_str());
  man.write(manifest_path(o, r.out));
  return kExitOk;
}

int run_reconstruct(const Options& o, Manifest& man) {
  const auto& r = o.recon;
  require_input(r.in);
  mr_sinogram* s = nullptr;
  check(mr_sinogram_load(r.in.c_str(), r.width, r.height, &s));
  Sinogram sino(s);
  man.add_input(r.in);
  Image out;
  if (r.algo == "sart") {
    mr_sart_config cfg;
    mr_sart_config_default(&cfg);
    cfg.n_iterations = r.iters;
    cfg.relaxation = r.relax;
    cfg.shuffled = r.order == "shuffled";
    cfg.seed = o.seed;
    cfg.nonnegativity = r.nonneg;
    cfg.snapshot_iters = r.snapshots.data();
    cfg.n_snapshots = static_cast<int>(r.snapshots.size());
    mr_image* img = nullptr;
    mr_recon_report* rep = nullptr;
    check(mr_sart(sino.get(), &cfg, &img, &rep));
    out.reset(img);
    Report report(rep);
    for (int i = 0; i < mr_report_n_snapshots(report.get()); ++i) {
      int iter = 0;
      const mr_image* snap = mr_report_snapshot(report.get(), i, &iter);
      char suffix[32];
      std::snprintf(suffix, sizeof suffix, "_iter%03d.pgm", iter);
      const fs::path p = with_suffix(r.out, suffix);
      check(mr_image_save(snap, p.string().c_str(), r.depth, r.clamp));
      man.add_output(p);
    }
    if (!r.report.empty()) {
      std::string csv = "iteration,residual\n";
      for (int k = 0; k < mr_report_n_iterations(report.get()); ++k)
        csv += std::to_string(k + 1) + "," + format_double(mr_report_residual(report.get(), k)) + "\n";
      write_text(r.report, csv);
    }
    const int n = mr_report_n_iterations(report.get());
    std::printf("sart: %d iterations, residual %.6g (initial %.6g)\n", n,
                n > 0 ? mr_report_residual(report.get(), n - 1) : mr_report_initial_residual(report.get()),
                mr_report_initial_residual(report.get()));
  } else {
    if (!r.report.empty()) validation("--report is only produced by --algo sart");
    mr_image* img = nullptr;
    check(mr_fbp(sino.get(), parse_filter(r.filter), &img));
    out.reset(img);
    std::printf("fbp: %s filter\n", r.filter.c_str());
  }
  check(mr_image_save(out.get(), r.out.c_str(), r.depth, r.clamp));
  man.add_output(r.out);
  if (!r.report.empty()) man.add_output(r.report);
  man.write(manifest_path(o, r.out));
  return kExitOk;
}

int run_design_lens(const Options& o, Manifest& man) {
  const auto& l = o.lens;
  const auto [aw, ah] = parse_pair(l.aperture, 'x', "--aperture");
  mr_lens_spec spec{l.wavelength, l.focal, aw, ah, l.period,
                    (l.profile == "hyp" || l.profile == "hyperboloid") ? MR_LENS_HYPERBOLOID
                                                                       : MR_LENS_CYLINDRICAL};
  if (l.library.empty() == (l.synthetic == 0))
    validation("exactly one of --library or --synthetic is required");
  mr_pillar_library* lp = nullptr;
  if (!l.library.empty()) {
    require_input(l.library);
    check(mr_library_load(l.library.c_str(), &lp));
    man.add_input(l.library);
  } else {
    check(mr_library_synthetic(l.synthetic, &lp));
  }
  Library lib(lp);
  for (int i = 0; i < mr_library_n_warnings(lib.get()); ++i)
    std::fprintf(stderr, "warning: %s\n", mr_library_warning(lib.get(), i));
  mr_lens_design* dp = nullptr;
  check(mr_lens_quantize(&spec, lib.get(), &dp));
  Design design(dp);
  for (int i = 0; i < mr_design_n_warnings(design.get()); ++i)
    std::fprintf(stderr, "warning: %s\n", mr_design_warning(design.get(), i));
  check(mr_design_export_layout(design.get(), l.out.c_str()));
  man.add_output(l.out);
  if (!l.residuals.empty()) {
    check(mr_design_export_residuals(design.get(), l.residuals.c_str()));
    man.add_output(l.residuals);
  }
  std::printf("layout: %d x %d pillars, max residual %.6g rad -> %s\n", mr_design_nx(design.get()),
              mr_design_ny(design.get()), mr_design_max_residual(design.get()), l.out.c_str());
  man.write(manifest_path(o, l.out));
  return kExitOk;
}

int run_bench(const Options& o, Manifest& man) {
  const auto& b = o.bench;
  const auto [gw, gh] = parse_pair(b.glyph, 'x', "--glyph");
  if (gw != static_cast<int>(gw) || gh != static_cast<int>(gh))
    validation("--glyph dimensions must be integers");
  std::error_code ec;
  fs::create_directories(b.outdir, ec);
  if (ec) io_error("cannot create " + b.outdir + ": " + ec.message());
  const fs::path dir(b.outdir);

  mr_image* sp = nullptr;
  check(mr_digit_scene(b.scene_size, b.scene_size, static_cast<int>(gh), static_cast<int>(gw), o.seed, &sp));
  Image scene(sp);
  mr_study_options opts;
  mr_study_options_default(&opts);
  opts.use_sart = b.recon == "sart";
  opts.filter = parse_filter(b.filter);
  opts.sart_iterations = b.sart_iters;
  opts.n_detectors = b.detectors;
  mr_compression_result radon{}, pool{};
  mr_image *ri = nullptr, *pi = nullptr;
  mr_sinogram* si = nullptr;
  check(mr_compression_study(scene.get(), b.angles, b.pool, &opts, &radon, &pool, &ri, &pi, &si));
  Image radon_img(ri), pool_img(pi);
  Sinogram sino(si);

  const auto save = [&](const mr_image* img, const char* name, int depth) {
    const fs::path p = dir / name;
    check(mr_image_save(img, p.string().c_str(), depth, 0));
    man.add_output(p);
  };
  save(scene.get(), "scene.pgm", 8);
  save(radon_img.get(), "radon_recon.pgm", 16);
  save(pool_img.get(), "pool_recon.pgm", 16);
  const fs::path sino_path = dir / "sinogram.rsg";
  check(mr_sinogram_save(sino.get(), sino_path.string().c_str()));
  man.add_output(sino_path);

  std::string csv = "method,captured_pixels,ratio,psnr,ssim\n";
  for (const auto* r : {&radon, &pool}) {
    csv += std::string(r->method == MR_COMPRESS_RADON ? "radon" : "avgpool") + "," +
           std::to_string(r->captured_pixels) + "," + format_double(r->ratio) + "," +
           format_double(r->psnr) + "," + format_double(r->ssim) + "\n";
    std::printf("%-8s captured %lld  ratio %.6f  psnr %.3f dB  ssim %.4f\n",
                r->method == MR_COMPRESS_RADON ? "radon" : "avgpool", r->captured_pixels, r->ratio,
                r->psnr, r->ssim);
  }
  const fs::path results = dir / "results.csv";
  write_text(results, csv);
  man.add_output(results);
  man.write(o.manifest.empty() ? dir / "manifest.json" : fs::path(o.manifest));
  return kExitOk;
}

mr_dataset_spec dataset_spec(const Options& o) {
  const auto& d = o.ds;
  mr_dataset_spec s;
  mr_dataset_spec_default(&s);
  s.n_train = d.n_train;
  s.n_test = d.n_test;
  s.pad = d.pad;
  s.target_dim = d.dim;
  s.n_angles = d.angles;
  s.augment = d.augment;
  s.augment_test = d.augment_test;
  s.rot_deg = d.rot;
  std::tie(s.translate_lo, s.translate_hi) = parse_pair(d.translate, ',', "--translate");
  std::tie(s.scale_lo, s.scale_hi) = parse_pair(d.scale, ',', "--scale");
  s.noise_frac = d.noise;
  s.seed = o.seed;
  s.domain = d.domain == "pixel" ? MR_DOMAIN_PIXEL : MR_DOMAIN_RADON;
  s.method = parse_method(d.method);
  return s;
}

Dataset read_feature_csv(const std::string& path) {
  require_input(path);
  std::ifstream in(path);
  if (!in) io_error("cannot open " + path);
  std::vector<double> features;
  std::vector<int> labels;
  int n_features = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.rfind("label", 0) == 0) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        validation(path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
    }
    if (row.size() < 2) validation(path + ":" + std::to_string(lineno) + ": need a label and features");
    const int d = static_cast<int>(row.size()) - 1;
    if (n_features >= 0 && d != n_features)
      validation(path + ":" + std::to_string(lineno) + ": inconsistent feature count");
    n_features = d;
    if (row[0] != static_cast<int>(row[0]) || row[0] < 0)
      validation(path + ":" + std::to_string(lineno) + ": label must be a non-negative integer");
    labels.push_back(static_cast<int>(row[0]));
    features.insert(features.end(), row.begin() + 1, row.end());
  }
  if (labels.empty()) validation(path + ": no rows");
  mr_dataset* p = nullptr;
  check(mr_dataset_from_arrays(static_cast<int>(labels.size()), n_features, features.data(),
                               labels.data(), &p));
  return Dataset(p);
}

Dataset load_dataset(const Options& o, Manifest& man, int split) {
  if (!o.ds.data.empty()) {
    auto ds = read_feature_csv(o.ds.data);
    man.add_input(o.ds.data);
    return ds;
  }
  const mr_dataset_spec spec = dataset_spec(o);
  mr_dataset* p = nullptr;
  check(mr_dataset_build_split(o.ds.mnist.c_str(), &spec, split, &p));
  const fs::path dir(o.ds.mnist);
  if (split == 0) {
    man.add_input(dir / "train-images-idx3-ubyte");
    man.add_input(dir / "train-labels-idx1-ubyte");
  } else {
    man.add_input(dir / "t10k-images-idx3-ubyte");
    man.add_input(dir / "t10k-labels-idx1-ubyte");
  }
  return Dataset(p);
}

void write_confusion(const std::vector<long long>& counts, int n_classes, const std::string& csv,
                     const std::string& heatmap, Manifest& man) {
  if (!csv.empty()) {
    check(mr_confusion_save_csv(counts.data(), n_classes, csv.c_str()));
    man.add_output(csv);
  }
  if (!heatmap.empty()) {
    mr_image* p = nullptr;
    check(mr_confusion_heatmap(counts.data(), n_classes, &p));
    Image img(p);
    check(mr_image_save(img.get(), heatmap.c_str(), 8, 0));
    man.add_output(heatmap);
  }
}

int run_train(const Options& o, Manifest& man) {
  const auto& t = o.train;
  if (!(t.val_frac > 0.0 && t.val_frac < 1.0)) validation("--val-frac must lie in (0, 1)");
  Dataset all = load_dataset(o, man, 0);
  mr_dataset *kp = nullptr, *hp = nullptr;
  check(mr_dataset_split(all.get(), t.val_frac, o.seed + 1, &kp, &hp));
  Dataset keep(kp), held(hp);
  if (mr_dataset_size(held.get()) == 0) validation("validation split is empty; raise --val-frac");

  mr_train_config cfg;
  mr_train_config_default(&cfg);
  cfg.epochs = t.epochs;
  cfg.learning_rate = t.lr;
  cfg.l2 = t.l2;
  cfg.batch_size = t.batch;
  cfg.seed = o.seed;
  std::vector<double> loss(static_cast<std::size_t>(std::max(t.epochs, 0)));
  mr_model* mp = nullptr;
  check(mr_train(keep.get(), &cfg, &mp, loss.data()));
  Model model(mp);
  if (o.ds.data.empty() && o.ds.domain == "radon")
    mr_model_set_shape(model.get(), o.ds.angles, mr_auto_detector_count(o.ds.dim, o.ds.dim));
  check(mr_model_save(model.get(), t.out.c_str()));
  man.add_output(t.out);

  const int nc = mr_model_n_classes(model.get());
  std::vector<long long> counts(static_cast<std::size_t>(nc) * nc);
  double acc = 0.0;
  check(mr_evaluate(model.get(), held.get(), &acc, counts.data()));
  write_confusion(counts, nc,
                  t.confusion.empty() ? with_suffix(t.out, "_val_confusion.csv").string() : t.confusion,
                  t.heatmap.empty() ? with_suffix(t.out, "_val_confusion.pgm").string() : t.heatmap, man);
  if (!t.loss.empty()) {
    std::string csv = "epoch,loss\n";
    for (std::size_t e = 0; e < loss.size(); ++e)
      csv += std::to_string(e + 1) + "," + format_double(loss[e]) + "\n";
    write_text(t.loss, csv);
    man.add_output(t.loss);
  }
  std::printf("trained on %d samples, validation accuracy %.4f (%d samples) -> %s\n",
              mr_dataset_size(keep.get()), acc, mr_dataset_size(held.get()), t.out.c_str());
  man.write(manifest_path(o, t.out));
  return kExitOk;
}

int run_eval(const Options& o, Manifest& man) {
  const auto& e = o.eval;
  require_input(e.model);
  mr_model* mp = nullptr;
  check(mr_model_load(e.model.c_str(), &mp));
  Model model(mp);
  man.add_input(e.model);
  Dataset data = load_dataset(o, man, e.split == "train" ? 0 : 1);
  const int nc = mr_model_n_classes(model.get());
  std::vector<long long> counts(static_cast<std::size_t>(nc) * nc);
  double acc = 0.0;
  check(mr_evaluate(model.get(), data.get(), &acc, counts.data()));
  write_confusion(counts, nc, e.confusion, e.heatmap, man);
  if (!e.report.empty()) {
    nlohmann::ordered_json j;
    j["accuracy"] = acc;
    j["samples"] = mr_dataset_size(data.get());
    j["split"] = o.ds.data.empty() ? e.split : "csv";
    write_text(e.report, j.dump(2) + "\n");
    man.add_output(e.report);
  }
  std::printf("accuracy %.4f on %d samples\n", acc, mr_dataset_size(data.get()));
  const fs::path anchor = e.report.empty() ? fs::path(e.model + ".eval") : fs::path(e.report);
  man.write(manifest_path(o, anchor));
  return kExitOk;
}

bool randomized(const std::string& cmd, const Options& o) {
  if (cmd == "bench" || cmd == "classify train" || cmd == "classify eval") return true;
  return cmd == "reconstruct" && o.recon.algo == "sart" && o.recon.order == "shuffled";
}

int parse_error(CLI::App& app, const CLI::ParseError& e) {
  const int rc = app.exit(e);
  return rc == 0 ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  Options first;
  auto app = build_app(first, false);
  try {
    app->parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return parse_error(*app, e);
  }

  Options o;
  std::unique_ptr<CLI::App> final_app;
  try {
    std::vector<std::string> full = args;
    if (!first.config.empty()) {
      const auto cfg = read_config(first.config);
      const auto extra = config_args(active_chain(app.get()), cfg);
      full.insert(full.end(), extra.begin(), extra.end());
    }
    final_app = build_app(o, true);
    std::vector<std::string> reversed(full.rbegin(), full.rend());
    try {
      final_app->parse(reversed);
    } catch (const CLI::ParseError& e) {
      return parse_error(*final_app, e);
    }

    const auto chain = active_chain(final_app.get());
    std::string cmd;
    for (std::size_t i = 1; i < chain.size(); ++i) cmd += (i > 1 ? " " : "") + chain[i]->get_name();
    const bool seed_given = final_app->get_option("--seed")->count() > 0;
    if (o.strict_seed && randomized(cmd, o) && !seed_given)
      validation("--strict-seed: '" + cmd + "' is randomized and needs an explicit --seed");

    mr_set_threads(o.threads);
    std::vector<std::string> full_argv{argv[0]};
    full_argv.insert(full_argv.end(), args.begin(), args.end());
    Manifest man(cmd, full_argv);
    man.set_seed(randomized(cmd, o) || seed_given ? std::optional<std::uint64_t>(o.seed) : std::nullopt);
    man.set_threads(o.threads);
    if (!o.config.empty()) {
      man.set_config(o.config);
      man.add_input(o.config);
    }

    if (cmd == "radon") return run_radon(o, man);
    if (cmd == "reconstruct") return run_reconstruct(o, man);
    if (cmd == "design-lens") return run_design_lens(o, man);
    if (cmd == "bench") return run_bench(o, man);
    if (cmd == "classify train") return run_train(o, man);
    if (cmd == "classify eval") return run_eval(o, man);
    validation("unknown subcommand '" + cmd + "'");
  } catch (const CliError& e) {
    std::fprintf(stderr, "metaradon-cli: %s\n", e.what());
    return e.code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "metaradon-cli: io error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "metaradon-cli: internal error: %s\n", e.what());
    return kExitInternal;
  }
}
