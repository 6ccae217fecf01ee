#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfad/image.hpp"
#include "cfad/pgm.hpp"

namespace cfad {

/// One procedural scene: a fixed background ("location") plus a parametric face.
struct SceneSpec {
  int width = 128;
  int height = 128;
  std::uint64_t location_seed = 1;  // background pattern; shared by a whole corpus
  bool background = true;           // false renders a flat mid-gray backdrop
  Point2 center{63.5, 63.5};        // eye midpoint
  double iod = 24.0;                // interocular distance in pixels
  double pose_degrees = 0.0;        // yaw in [-30, 30]
  int identity = 0;                 // perturbs the face's internal proportions
  double brightness = 0.0;          // global lighting offset
  double contrast = 1.0;            // global lighting gain around 0.5
  double noise_sigma = 0.0;         // additive Gaussian noise
  std::uint64_t noise_seed = 0;
};

struct Scene {
  Image image;  // quantized to k/255 so it survives a PGM round trip exactly
  EyeAnnotation eyes;
  FaceRect rect;
};

/// Renders a scene. The eyes sit at center -/+ (iod/2, 0) exactly; the face
/// never paints outside its ground-truth rectangle grown by 2 px.
Scene render_scene(const SceneSpec& spec, const CropGeometry& crop = {});

/// Eye blob of the face model at a given radius, as a (2r+1)-square patch on a unit backdrop.
Image eye_kernel(double radius_px);

/// Eye blob radius used for an identity at a given scale and pose (left eye if `left`).
double eye_radius(int identity, double iod, double pose_degrees, bool left);

struct IdentityPool {
  int first = 0;
  int count = 1;
};

/// Distribution the corpus generator samples scenes from.
struct CorpusSpec {
  int width = 320;
  int height = 240;
  std::uint64_t location_seed = 1;
  bool background = true;

  // Scale: log-uniform interocular width in [iod_min, iod_max], unless
  // `octaves` is non-empty, in which case images cycle through
  // (octave, pose) cells and get +/- octave_jitter.
  double iod_min = 16.0;
  double iod_max = 32.0;
  std::vector<double> octaves;
  double octave_jitter = 0.0;

  // Pose: uniform in [pose_min, pose_max], unless `poses` is non-empty
  // (cycled with the octaves, +/- pose_jitter).
  double pose_min = -10.0;
  double pose_max = 10.0;
  std::vector<double> poses;
  double pose_jitter = 0.0;

  double brightness_jitter = 0.08;
  double contrast_min = 0.85;
  double contrast_max = 1.15;
  double noise_sigma = 0.02;

  IdentityPool train_identities{0, 40};
  IdentityPool test_identities{1000, 20};
  CropGeometry crop;
};

struct CorpusImage {
  std::string name;  // relative path, e.g. "train/0007.pgm"
  SceneSpec spec;
  Scene scene;
};

struct Corpus {
  CorpusSpec spec;
  std::uint64_t seed = 0;
  std::vector<CorpusImage> train;
  std::vector<CorpusImage> test;

  std::string hash() const;
  nlohmann::json manifest() const;
};

/// Deterministic corpus: image i of a split depends only on (seed, split, i).
Corpus generate_corpus(const CorpusSpec& spec, int n_train, int n_test, std::uint64_t seed, unsigned workers = 0);

/// Writes train/ and test/ PGMs, train.csv, test.csv and manifest.json.
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

Dataset to_dataset(const std::vector<CorpusImage>& images);

nlohmann::json to_json(const CorpusSpec& spec);
CorpusSpec corpus_spec_from_json(const nlohmann::json& j);

/// Presets used by the experiment harnesses.
CorpusSpec repeated_setting_spec();  // 384x288, interocular 16-32 px, near-frontal
CorpusSpec bank_grid_spec();         // quarter octaves 4..7 x poses {-22, 0, +22}

}  // namespace cfad
