#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "metaradon/image.hpp"
#include "metaradon/projector.hpp"

namespace metaradon {

// --- MNIST IDX ------------------------------------------------------------

struct IdxImages {
  int count = 0;
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols

  ImageGrid image(int i) const;  // scaled to [0, 1]
};

// Big-endian IDX: magic 0x00000803, count, rows, cols, u8 pixels.
IdxImages read_idx_images(const std::filesystem::path& path);
IdxImages parse_idx_images(const std::vector<std::uint8_t>& bytes);
// Magic 0x00000801, count, u8 labels.
std::vector<int> read_idx_labels(const std::filesystem::path& path);
std::vector<int> parse_idx_labels(const std::vector<std::uint8_t>& bytes);

// --- dataset --------------------------------------------------------------

struct AugmentSpec {
  bool enabled = true;
  double rot_deg = 50.0;          // rotation ~ U(-rot_deg, rot_deg)
  double translate_lo = 0.10;     // |t| ~ U(lo, hi) per axis, random sign,
  double translate_hi = 0.30;     //   as a fraction of the image width/height
  double scale_lo = 0.80;         // scale ~ U(lo, hi)
  double scale_hi = 1.20;
};

enum class FeatureDomain { Radon, Pixel };

struct DatasetSpec {
  int n_train = 5000;
  int n_test = 1000;
  int pad = 14;
  int target_dim = 64;
  int n_angles = 23;
  AugmentSpec aug;
  bool augment_test = true;
  double noise_frac = 0.05;
  std::uint64_t seed = 0;
  FeatureDomain domain = FeatureDomain::Radon;
  RadonMethod method = RadonMethod::RayDriven;

  void validate() const;
  // Unpadded-resized image dims and detector count implied by the spec.
  int n_detectors() const;
  int feature_length() const;
};

struct Dataset {
  int n_features = 0;
  std::vector<double> features;  // row-major, size() * n_features
  std::vector<int> labels;

  int size() const noexcept { return static_cast<int>(labels.size()); }
  const double* row(int i) const { return features.data() + static_cast<std::size_t>(i) * n_features; }
};

// pad -> resize -> optional random affine -> noise -> feature extraction.
// `stream_id` selects the random stream; the item index is mixed in so that
// results do not depend on evaluation order or thread count.
ImageGrid preprocess_digit(const ImageGrid& digit, const DatasetSpec& spec, bool augment,
                           std::uint64_t stream_id, std::uint64_t index);
std::vector<double> extract_features(const ImageGrid& img, const DatasetSpec& spec);

Dataset build_dataset(const IdxImages& images, const std::vector<int>& labels, int count,
                      const DatasetSpec& spec, bool augment, std::uint64_t stream_id);

struct RadonDatasets {
  Dataset train;
  Dataset test;
};

// Reads train-{images,labels} and t10k-{images,labels} from `mnist_dir`.
enum class MnistSplit { Train, Test };

// Train images are always augmented; test images only when spec.augment_test.
Dataset build_mnist_split(const std::filesystem::path& mnist_dir, const DatasetSpec& spec,
                          MnistSplit split);

RadonDatasets build_radon_dataset(const std::filesystem::path& mnist_dir,
                                  const DatasetSpec& spec);

// Seeded split; the first part keeps 1 - frac of the rows.
void split_dataset(const Dataset& all, double frac, std::uint64_t seed, Dataset& keep,
                   Dataset& held_out);

// --- model ----------------------------------------------------------------

struct ClassifierModel {
  int n_classes = 10;
  int n_features = 0;
  int n_angles = 0;       // informational: sinogram shape of the features
  int n_detectors = 0;
  std::vector<double> weights;  // n_classes * (n_features + 1), bias last
  std::vector<double> mean;     // per-feature, from training data
  std::vector<double> stddev;

  double weight(int cls, int j) const {
    return weights[static_cast<std::size_t>(cls) * (n_features + 1) + j];
  }
  // argmax of the logits; ties resolve to the lowest class index.
  int predict(const double* raw_features) const;
};

struct TrainConfig {
  int epochs = 30;
  double learning_rate = 0.05;
  double l2 = 1e-4;
  int batch_size = 64;
  int n_classes = 10;
  std::uint64_t seed = 0;
};

struct TrainResult {
  ClassifierModel model;
  std::vector<double> epoch_loss;  // full training loss after each epoch
};

// Minibatch SGD on mean cross-entropy + (l2 / 2) * ||W||^2 (bias excluded).
TrainResult train_softmax(const Dataset& train, const TrainConfig& cfg);

// Per-feature mean/std of `data`; std below 1e-12 is replaced by 1.
void feature_statistics(const Dataset& data, std::vector<double>& mean,
                        std::vector<double>& stddev);

// Objective on `data` for the given model; fills `grad` (same layout as
// weights) when non-null.
double softmax_objective(const ClassifierModel& model, const Dataset& data, double l2,
                         std::vector<double>* grad);

struct ConfusionMatrix {
  int n_classes = 10;
  std::vector<long long> counts;  // [true][predicted]

  long long at(int t, int p) const { return counts[static_cast<std::size_t>(t) * n_classes + p]; }
  long long total() const;
  long long trace() const;
  long long row_sum(int t) const;
};

struct Evaluation {
  double accuracy = 0.0;
  ConfusionMatrix confusion;
};

Evaluation evaluate(const ClassifierModel& model, const Dataset& test);

// RCM1: "RCM1", u32 version (1), u32 n_classes, u32 n_features, u32 n_angles,
// u32 n_detectors, f64 weights, f64 mean[n_features], f64 std[n_features];
// little-endian.
std::vector<std::uint8_t> encode_model(const ClassifierModel& m);
ClassifierModel decode_model(const std::vector<std::uint8_t>& bytes);
void save_model(const ClassifierModel& m, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

void save_confusion_csv(const ConfusionMatrix& cm, const std::filesystem::path& path);
// Row-normalized heatmap: pixel (p, t) = count / row_sum(t).
ImageGrid confusion_heatmap(const ConfusionMatrix& cm);

}  // namespace metaradon
