#include "metaradon/classify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

#include "metaradon/error.hpp"
#include "metaradon/parallel.hpp"
#include "metaradon/rng.hpp"

namespace metaradon {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& b) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot create '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t at) {
  if (at + 4 > b.size())
    fail(ErrorKind::Parse, "IDX: truncated header at byte offset " + std::to_string(at));
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

}  // namespace

ImageGrid IdxImages::image(int i) const {
  require(i >= 0 && i < count, "IDX image index out of range");
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  std::vector<double> d(n);
  const std::uint8_t* src = pixels.data() + static_cast<std::size_t>(i) * n;
  for (std::size_t k = 0; k < n; ++k) d[k] = src[k] / 255.0;
  return ImageGrid(cols, rows, std::move(d));
}

IdxImages parse_idx_images(const std::vector<std::uint8_t>& b) {
  const std::uint32_t magic = be32(b, 0);
  if (magic != 0x00000803)
    fail(ErrorKind::Parse, "IDX images: bad magic at byte offset 0 (expected 0x00000803)");
  IdxImages out;
  out.count = static_cast<int>(be32(b, 4));
  out.rows = static_cast<int>(be32(b, 8));
  out.cols = static_cast<int>(be32(b, 12));
  if (out.rows <= 0 || out.cols <= 0)
    fail(ErrorKind::Parse, "IDX images: invalid dims at byte offset 8");
  const std::size_t need = 16 + static_cast<std::size_t>(out.count) * out.rows * out.cols;
  if (b.size() < need)
    fail(ErrorKind::Parse, "IDX images: data truncated at byte offset " +
                               std::to_string(b.size()) + " (expected " +
                               std::to_string(need) + " bytes)");
  out.pixels.assign(b.begin() + 16, b.begin() + static_cast<std::ptrdiff_t>(need));
  return out;
}

IdxImages read_idx_images(const std::filesystem::path& path) {
  return parse_idx_images(read_file(path));
}

std::vector<int> parse_idx_labels(const std::vector<std::uint8_t>& b) {
  const std::uint32_t magic = be32(b, 0);
  if (magic != 0x00000801)
    fail(ErrorKind::Parse, "IDX labels: bad magic at byte offset 0 (expected 0x00000801)");
  const std::uint32_t n = be32(b, 4);
  if (b.size() < 8 + static_cast<std::size_t>(n))
    fail(ErrorKind::Parse, "IDX labels: data truncated at byte offset " +
                               std::to_string(b.size()));
  return std::vector<int>(b.begin() + 8, b.begin() + 8 + n);
}

std::vector<int> read_idx_labels(const std::filesystem::path& path) {
  return parse_idx_labels(read_file(path));
}

void DatasetSpec::validate() const {
  require(n_train >= 1 && n_test >= 1, "dataset counts must be >= 1");
  require(pad >= 0, "pad must be >= 0");
  require(target_dim >= 1, "target_dim must be >= 1");
  require(n_angles >= 1, "n_angles must be >= 1");
  require(aug.rot_deg >= 0.0, "rotation range must be >= 0");
  require(0.0 <= aug.translate_lo && aug.translate_lo <= aug.translate_hi &&
              aug.translate_hi < 1.0,
          "translation range must satisfy 0 <= lo <= hi < 1");
  require(0.0 < aug.scale_lo && aug.scale_lo <= aug.scale_hi, "scale range must be positive");
  require(noise_frac >= 0.0, "noise fraction must be >= 0");
}

int DatasetSpec::n_detectors() const { return auto_detector_count(target_dim, target_dim); }

int DatasetSpec::feature_length() const {
  return domain == FeatureDomain::Radon ? n_angles * n_detectors() : target_dim * target_dim;
}

ImageGrid preprocess_digit(const ImageGrid& digit, const DatasetSpec& spec, bool augment,
                           std::uint64_t stream_id, std::uint64_t index) {
  ImageGrid img = resize(pad_image(digit, spec.pad), spec.target_dim, spec.target_dim);
  if (!augment) return img;
  Rng rng = Rng::stream(spec.seed ^ (0xA24BAED4963EE407ull * (stream_id + 1)), index);
  if (spec.aug.enabled) {
    AffineSpec a;
    a.rotation_deg = rng.uniform(-spec.aug.rot_deg, spec.aug.rot_deg);
    const double mx = rng.uniform(spec.aug.translate_lo, spec.aug.translate_hi);
    const double my = rng.uniform(spec.aug.translate_lo, spec.aug.translate_hi);
    a.translate_x = (rng.next_u64() & 1) ? mx : -mx;
    a.translate_y = (rng.next_u64() & 1) ? my : -my;
    a.scale = rng.uniform(spec.aug.scale_lo, spec.aug.scale_hi);
    img = affine_transform(img, a);
  }
  if (spec.noise_frac > 0.0) img = add_gaussian_noise(img, {spec.noise_frac, rng.next_u64()});
  return img;
}

std::vector<double> extract_features(const ImageGrid& img, const DatasetSpec& spec) {
  if (spec.domain == FeatureDomain::Pixel) return {img.data().begin(), img.data().end()};
  const auto geom = ProjectionGeometry::for_image(img.width(), img.height(),
                                                  make_uniform_angles(spec.n_angles));
  const Sinogram s = radon(img, geom, spec.method);
  return {s.data().begin(), s.data().end()};
}

Dataset build_dataset(const IdxImages& images, const std::vector<int>& labels, int count,
                      const DatasetSpec& spec, bool augment, std::uint64_t stream_id) {
  spec.validate();
  if (count > images.count || count > static_cast<int>(labels.size()))
    fail(ErrorKind::InsufficientData, "requested " + std::to_string(count) +
                                          " samples but the IDX files hold " +
                                          std::to_string(std::min<std::size_t>(
                                              images.count, labels.size())));
  Dataset ds;
  ds.n_features = spec.feature_length();
  ds.features.assign(static_cast<std::size_t>(count) * ds.n_features, 0.0);
  ds.labels.assign(labels.begin(), labels.begin() + count);
  parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
    const ImageGrid img =
        preprocess_digit(images.image(static_cast<int>(i)), spec, augment, stream_id, i);
    const auto f = extract_features(img, spec);
    std::copy(f.begin(), f.end(), ds.features.begin() + static_cast<std::ptrdiff_t>(i * ds.n_features));
  });
  return ds;
}

Dataset build_mnist_split(const std::filesystem::path& dir, const DatasetSpec& spec,
                          MnistSplit split) {
  spec.validate();
  if (split == MnistSplit::Train) {
    const auto img = read_idx_images(dir / "train-images-idx3-ubyte");
    const auto lab = read_idx_labels(dir / "train-labels-idx1-ubyte");
    return build_dataset(img, lab, spec.n_train, spec, true, 0);
  }
  const auto img = read_idx_images(dir / "t10k-images-idx3-ubyte");
  const auto lab = read_idx_labels(dir / "t10k-labels-idx1-ubyte");
  return build_dataset(img, lab, spec.n_test, spec, spec.augment_test, 1);
}

RadonDatasets build_radon_dataset(const std::filesystem::path& dir, const DatasetSpec& spec) {
  RadonDatasets out;
  out.train = build_mnist_split(dir, spec, MnistSplit::Train);
  out.test = build_mnist_split(dir, spec, MnistSplit::Test);
  return out;
}

void split_dataset(const Dataset& all, double frac, std::uint64_t seed, Dataset& keep,
                   Dataset& held_out) {
  require(frac >= 0.0 && frac < 1.0, "split fraction must lie in [0, 1)");
  std::vector<int> idx(static_cast<std::size_t>(all.size()));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (int i = all.size() - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  const int n_held = static_cast<int>(std::floor(all.size() * frac));
  keep = Dataset{all.n_features, {}, {}};
  held_out = Dataset{all.n_features, {}, {}};
  for (int k = 0; k < all.size(); ++k) {
    Dataset& dst = k < n_held ? held_out : keep;
    const double* r = all.row(idx[k]);
    dst.features.insert(dst.features.end(), r, r + all.n_features);
    dst.labels.push_back(all.labels[idx[k]]);
  }
}

int ClassifierModel::predict(const double* x) const {
  int best = 0;
  double best_v = -INFINITY;
  for (int c = 0; c < n_classes; ++c) {
    const double* w = weights.data() + static_cast<std::size_t>(c) * (n_features + 1);
    double v = w[n_features];
    for (int j = 0; j < n_features; ++j) v += w[j] * (x[j] - mean[j]) / stddev[j];
    if (v > best_v) {
      best_v = v;
      best = c;
    }
  }
  return best;
}

void feature_statistics(const Dataset& data, std::vector<double>& mean,
                        std::vector<double>& stddev) {
  const int d = data.n_features;
  mean.assign(static_cast<std::size_t>(d), 0.0);
  stddev.assign(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < data.size(); ++i) {
    const double* r = data.row(i);
    for (int j = 0; j < d; ++j) mean[j] += r[j];
  }
  for (double& m : mean) m /= data.size();
  for (int i = 0; i < data.size(); ++i) {
    const double* r = data.row(i);
    for (int j = 0; j < d; ++j) stddev[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
  }
  for (double& s : stddev) {
    s = std::sqrt(s / data.size());
    if (s < 1e-12) s = 1.0;
  }
}

namespace {

// logits -> probabilities in place; returns log-sum-exp.
double softmax_inplace(std::vector<double>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    s += v;
  }
  for (double& v : z) v /= s;
  return mx + std::log(s);
}

void check_labels(const Dataset& data, int n_classes) {
  for (int y : data.labels)
    require(y >= 0 && y < n_classes, "label outside [0, n_classes)");
}

// Adds the gradient of the cross-entropy for one normalized sample into grad
// and returns its loss.
double accumulate_sample(const std::vector<double>& w, int n_classes, int d, const double* x,
                         int y, std::vector<double>& z, double* grad) {
  for (int c = 0; c < n_classes; ++c) {
    const double* wc = w.data() + static_cast<std::size_t>(c) * (d + 1);
    double v = wc[d];
    for (int j = 0; j < d; ++j) v += wc[j] * x[j];
    z[c] = v;
  }
  const double logit_y = z[y];
  const double lse = softmax_inplace(z);
  if (grad) {
    for (int c = 0; c < n_classes; ++c) {
      const double g = z[c] - (c == y ? 1.0 : 0.0);
      double* gc = grad + static_cast<std::size_t>(c) * (d + 1);
      for (int j = 0; j < d; ++j) gc[j] += g * x[j];
      gc[d] += g;
    }
  }
  return lse - logit_y;
}

}  // namespace

double softmax_objective(const ClassifierModel& m, const Dataset& data, double l2,
                         std::vector<double>* grad) {
  if (data.n_features != m.n_features)
    fail(ErrorKind::Dimension, "feature dims do not match the model");
  check_labels(data, m.n_classes);
  const int d = m.n_features;
  if (grad) grad->assign(m.weights.size(), 0.0);
  std::vector<double> x(static_cast<std::size_t>(d)), z(static_cast<std::size_t>(m.n_classes));
  double loss = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    const double* r = data.row(i);
    for (int j = 0; j < d; ++j) x[j] = (r[j] - m.mean[j]) / m.stddev[j];
    loss += accumulate_sample(m.weights, m.n_classes, d, x.data(), data.labels[i], z,
                              grad ? grad->data() : nullptr);
  }
  const double inv_n = 1.0 / data.size();
  loss *= inv_n;
  double reg = 0.0;
  for (int c = 0; c < m.n_classes; ++c)
    for (int j = 0; j < d; ++j) {
      const std::size_t k = static_cast<std::size_t>(c) * (d + 1) + j;
      reg += m.weights[k] * m.weights[k];
      if (grad) (*grad)[k] = (*grad)[k] * inv_n + l2 * m.weights[k];
    }
  if (grad)
    for (int c = 0; c < m.n_classes; ++c)
      (*grad)[static_cast<std::size_t>(c) * (d + 1) + d] *= inv_n;
  return loss + 0.5 * l2 * reg;
}

TrainResult train_softmax(const Dataset& train, const TrainConfig& cfg) {
  require(cfg.epochs >= 0, "epochs must be >= 0");
  require(cfg.learning_rate > 0.0, "learning rate must be > 0");
  require(cfg.l2 >= 0.0, "l2 must be >= 0");
  require(cfg.batch_size >= 1, "batch size must be >= 1");
  require(cfg.n_classes >= 2, "need at least 2 classes");
  require(train.size() >= 1, "training set is empty");
  check_labels(train, cfg.n_classes);
  {
    std::vector<int> seen(static_cast<std::size_t>(cfg.n_classes), 0);
    for (int y : train.labels) seen[y] = 1;
    if (std::accumulate(seen.begin(), seen.end(), 0) < 2)
      fail(ErrorKind::Validation, "training set contains a single class");
  }

  TrainResult out;
  ClassifierModel& m = out.model;
  m.n_classes = cfg.n_classes;
  m.n_features = train.n_features;
  m.weights.assign(static_cast<std::size_t>(m.n_classes) * (m.n_features + 1), 0.0);
  feature_statistics(train, m.mean, m.stddev);

  const int n = train.size();
  const int d = m.n_features;
  std::vector<double> xs(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n; ++i) {
    const double* r = train.row(i);
    for (int j = 0; j < d; ++j) xs[static_cast<std::size_t>(i) * d + j] = (r[j] - m.mean[j]) / m.stddev[j];
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);
  std::vector<double> grad(m.weights.size()), z(static_cast<std::size_t>(m.n_classes));
  for (int ep = 0; ep < cfg.epochs; ++ep) {
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int stop = std::min(n, start + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (int b = start; b < stop; ++b) {
        const int i = order[b];
        accumulate_sample(m.weights, m.n_classes, d, xs.data() + static_cast<std::size_t>(i) * d,
                          train.labels[i], z, grad.data());
      }
      const double inv_b = 1.0 / (stop - start);
      for (int c = 0; c < m.n_classes; ++c) {
        double* w = m.weights.data() + static_cast<std::size_t>(c) * (d + 1);
        const double* g = grad.data() + static_cast<std::size_t>(c) * (d + 1);
        for (int j = 0; j < d; ++j) w[j] -= cfg.learning_rate * (g[j] * inv_b + cfg.l2 * w[j]);
        w[d] -= cfg.learning_rate * g[d] * inv_b;
      }
    }
    out.epoch_loss.push_back(softmax_objective(m, train, cfg.l2, nullptr));
  }
  return out;
}

long long ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0ll);
}
long long ConfusionMatrix::trace() const {
  long long t = 0;
  for (int i = 0; i < n_classes; ++i) t += at(i, i);
  return t;
}
long long ConfusionMatrix::row_sum(int t) const {
  long long s = 0;
  for (int p = 0; p < n_classes; ++p) s += at(t, p);
  return s;
}

Evaluation evaluate(const ClassifierModel& model, const Dataset& test) {
  if (test.n_features != model.n_features)
    fail(ErrorKind::Dimension, "test features have length " + std::to_string(test.n_features) +
                                   " but the model expects " +
                                   std::to_string(model.n_features));
  require(test.size() >= 1, "test set is empty");
  check_labels(test, model.n_classes);
  Evaluation ev;
  ev.confusion.n_classes = model.n_classes;
  ev.confusion.counts.assign(static_cast<std::size_t>(model.n_classes) * model.n_classes, 0);
  std::vector<int> pred(static_cast<std::size_t>(test.size()));
  parallel_for(pred.size(), [&](std::size_t i) { pred[i] = model.predict(test.row(static_cast<int>(i))); });
  for (int i = 0; i < test.size(); ++i)
    ++ev.confusion.counts[static_cast<std::size_t>(test.labels[i]) * model.n_classes + pred[i]];
  ev.accuracy = static_cast<double>(ev.confusion.trace()) / ev.confusion.total();
  return ev;
}

namespace {
void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put64(std::vector<std::uint8_t>& b, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
std::uint32_t get32(const std::vector<std::uint8_t>& b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[at + i]} << (8 * i);
  return v;
}
double get64(const std::vector<std::uint8_t>& b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[at + i]} << (8 * i);
  return std::bit_cast<double>(v);
}
}  // namespace

std::vector<std::uint8_t> encode_model(const ClassifierModel& m) {
  std::vector<std::uint8_t> b{'R', 'C', 'M', '1'};
  put32(b, 1);
  put32(b, static_cast<std::uint32_t>(m.n_classes));
  put32(b, static_cast<std::uint32_t>(m.n_features));
  put32(b, static_cast<std::uint32_t>(m.n_angles));
  put32(b, static_cast<std::uint32_t>(m.n_detectors));
  for (double v : m.weights) put64(b, v);
  for (double v : m.mean) put64(b, v);
  for (double v : m.stddev) put64(b, v);
  return b;
}

ClassifierModel decode_model(const std::vector<std::uint8_t>& b) {
  if (b.size() < 24 || std::memcmp(b.data(), "RCM1", 4) != 0)
    fail(ErrorKind::Format, "not an RCM1 model (bad magic at byte offset 0)");
  if (get32(b, 4) != 1) fail(ErrorKind::Format, "unsupported RCM1 version at byte offset 4");
  ClassifierModel m;
  m.n_classes = static_cast<int>(get32(b, 8));
  m.n_features = static_cast<int>(get32(b, 12));
  m.n_angles = static_cast<int>(get32(b, 16));
  m.n_detectors = static_cast<int>(get32(b, 20));
  const std::size_t nw = static_cast<std::size_t>(m.n_classes) * (m.n_features + 1);
  const std::size_t need = 24 + 8 * (nw + 2 * static_cast<std::size_t>(m.n_features));
  if (m.n_classes < 2 || b.size() != need)
    fail(ErrorKind::Parse, "RCM1: expected " + std::to_string(need) + " bytes, found " +
                               std::to_string(b.size()));
  std::size_t at = 24;
  m.weights.resize(nw);
  for (auto& v : m.weights) v = get64(b, at), at += 8;
  m.mean.resize(static_cast<std::size_t>(m.n_features));
  for (auto& v : m.mean) v = get64(b, at), at += 8;
  m.stddev.resize(static_cast<std::size_t>(m.n_features));
  for (auto& v : m.stddev) v = get64(b, at), at += 8;
  return m;
}

void save_model(const ClassifierModel& m, const std::filesystem::path& path) {
  write_file(path, encode_model(m));
}

ClassifierModel load_model(const std::filesystem::path& path) {
  return decode_model(read_file(path));
}

void save_confusion_csv(const ConfusionMatrix& cm, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot create '" + path.string() + "'");
  out << "true";
  for (int p = 0; p < cm.n_classes; ++p) out << ",pred_" << p;
  out << "\n";
  for (int t = 0; t < cm.n_classes; ++t) {
    out << t;
    for (int p = 0; p < cm.n_classes; ++p) out << "," << cm.at(t, p);
    out << "\n";
  }
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

ImageGrid confusion_heatmap(const ConfusionMatrix& cm) {
  ImageGrid img(cm.n_classes, cm.n_classes);
  for (int t = 0; t < cm.n_classes; ++t) {
    const long long rs = cm.row_sum(t);
    for (int p = 0; p < cm.n_classes; ++p)
      img.at(p, t) = rs > 0 ? static_cast<double>(cm.at(t, p)) / rs : 0.0;
  }
  return img;
}

}  // namespace metaradon
