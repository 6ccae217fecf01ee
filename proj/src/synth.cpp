#include "cfad/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "cfad/json_io.hpp"
#include "cfad/parallel.hpp"

namespace cfad {
namespace {

constexpr double kMaxPose = 30.0;
constexpr double kFaceMargin = 2.0;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Platform-stable generator: std distributions are implementation-defined,
// so uniforms and normals are derived from raw 64-bit outputs here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix(seed)) {}

  std::uint64_t next() {
    state_ = splitmix(state_);
    return state_;
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return splitmix(a ^ splitmix(b + 0x632be59bd9b4e019ull)); }

// Anti-aliased coverage for a signed distance in pixels (negative inside).
double coverage(double signed_distance) { return std::clamp(0.5 - signed_distance, 0.0, 1.0); }

struct Proportions {
  double head_a;      // head semi-axis x, in iod
  double head_b;      // head semi-axis y, in iod
  double skin;
  double hair;
  double hair_line;   // fraction of head_b above center where hair starts
  double eye_radius;  // in iod
  double eye_depth;
  double brow_lift;   // brow height above eyes, in iod
  double brow_tone;
  double mouth_y;     // mouth offset below the eye line, in iod
  double mouth_half;  // mouth half width, in iod
  double mouth_tone;
};

Proportions proportions(int identity) {
  Rng r(mix(0xfacefaceull, static_cast<std::uint64_t>(identity)));
  Proportions p;
  p.head_a = 0.8 * r.uniform(0.96, 1.04);
  p.head_b = 1.0 * r.uniform(0.96, 1.04);
  p.skin = r.uniform(0.55, 0.82);
  p.hair = r.uniform(0.08, 0.35);
  p.hair_line = r.uniform(0.45, 0.65);
  p.eye_radius = r.uniform(0.13, 0.17);
  p.eye_depth = r.uniform(0.55, 0.75);
  p.brow_lift = r.uniform(0.25, 0.32);
  p.brow_tone = r.uniform(0.15, 0.35);
  p.mouth_y = r.uniform(0.72, 0.86);
  p.mouth_half = r.uniform(0.24, 0.34);
  p.mouth_tone = r.uniform(0.2, 0.4);
  return p;
}

// Fixed clutter for one location: painted in order over a shaded backdrop.
struct Clutter {
  enum Kind { Rect, Disk, Stripes } kind;
  double x0, y0, x1, y1;  // bounding box in pixels (disks use the inscribed ellipse)
  double tone;
  double period;
};

std::vector<Clutter> clutter_for(std::uint64_t location_seed, int w, int h) {
  Rng r(mix(location_seed, 0xb4c6ull));
  std::vector<Clutter> items;
  const int n = 14;
  for (int i = 0; i < n; ++i) {
    Clutter c;
    const int k = r.below(10);
    c.kind = k < 5 ? Clutter::Rect : (k < 8 ? Clutter::Disk : Clutter::Stripes);
    const double cw = r.uniform(0.06, 0.35) * w;
    const double ch = r.uniform(0.06, 0.45) * h;
    c.x0 = r.uniform(-0.1 * w, w - 0.5 * cw);
    c.y0 = r.uniform(-0.1 * h, h - 0.5 * ch);
    c.x1 = c.x0 + cw;
    c.y1 = c.y0 + ch;
    c.tone = r.uniform(0.05, 0.95);
    c.period = r.uniform(3.0, 9.0);
    items.push_back(c);
  }
  return items;
}

double background_at(const std::vector<Clutter>& items, double x, double y, int w, int h) {
  double v = 0.42 + 0.12 * (x / w) - 0.08 * (y / h) + 0.04 * std::sin(x * 0.05 + y * 0.031);
  for (const auto& c : items) {
    double cov = 0.0;
    if (c.kind == Clutter::Disk) {
      const double rx = 0.5 * (c.x1 - c.x0);
      const double ry = 0.5 * (c.y1 - c.y0);
      const double dx = (x - 0.5 * (c.x0 + c.x1)) / rx;
      const double dy = (y - 0.5 * (c.y0 + c.y1)) / ry;
      cov = coverage((std::sqrt(dx * dx + dy * dy) - 1.0) * std::min(rx, ry));
    } else {
      const double d = std::max(std::max(c.x0 - x, x - c.x1), std::max(c.y0 - y, y - c.y1));
      cov = coverage(d);
    }
    if (cov <= 0.0) continue;
    double tone = c.tone;
    if (c.kind == Clutter::Stripes) tone = c.tone * (0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * x / c.period));
    v = (1.0 - cov) * v + cov * tone;
  }
  return v;
}

}  // namespace

double eye_radius(int identity, double iod, double pose_degrees, bool left) {
  const double sp = std::sin(pose_degrees * std::numbers::pi / 180.0);
  return proportions(identity).eye_radius * iod * (left ? 1.0 + 0.25 * sp : 1.0 - 0.25 * sp);
}

Image eye_kernel(double radius_px) {
  const int r = static_cast<int>(std::ceil(2.5 * radius_px));
  Image k(2 * r + 1, 2 * r + 1);
  for (int y = -r; y <= r; ++y) {
    for (int x = -r; x <= r; ++x) k(y + r, x + r) = 1.0 - std::exp(-(x * x + y * y) / (2.0 * radius_px * radius_px));
  }
  return k;
}

Scene render_scene(const SceneSpec& spec, const CropGeometry& crop) {
  if (spec.width <= 0 || spec.height <= 0) throw Error(ErrorKind::InvalidArgument, "render_scene: empty canvas");
  if (!(spec.iod > 0.0)) throw Error(ErrorKind::InvalidArgument, "render_scene: iod must be positive");
  if (std::abs(spec.pose_degrees) > kMaxPose) throw Error(ErrorKind::InvalidArgument, "render_scene: |pose| > 30 degrees");

  Scene scene;
  scene.eyes.left_eye = {spec.center.x - 0.5 * spec.iod, spec.center.y};
  scene.eyes.right_eye = {spec.center.x + 0.5 * spec.iod, spec.center.y};
  scene.rect = face_rect(scene.eyes, crop);
  const FaceRect& r = scene.rect;
  if (r.x < 0 || r.y < 0 || r.x + r.w > spec.width || r.y + r.h > spec.height) {
    throw Error(ErrorKind::OutOfBounds, "render_scene: face rectangle leaves the canvas");
  }

  const Proportions p = proportions(spec.identity);
  const double s = spec.iod;
  const double sp = std::sin(spec.pose_degrees * std::numbers::pi / 180.0);
  const double shear = 0.1 * sp;
  const double hx = spec.center.x - 0.12 * sp * s;  // head center
  const double hy = spec.center.y + 0.1 * s;
  const double ha = p.head_a * s;
  const double hb = p.head_b * s;
  const double r_left = eye_radius(spec.identity, s, spec.pose_degrees, true);
  const double r_right = eye_radius(spec.identity, s, spec.pose_degrees, false);
  const double mouth_x = spec.center.x + 0.1 * sp * s;
  const double mouth_y = spec.center.y + p.mouth_y * s;
  const double brow_y = spec.center.y - p.brow_lift * s;

  const auto items = clutter_for(spec.location_seed, spec.width, spec.height);
  Image img(spec.height, spec.width);
  const double face_x0 = r.x - kFaceMargin;
  const double face_x1 = r.x + r.w - 1 + kFaceMargin;
  const double face_y0 = r.y - kFaceMargin;
  const double face_y1 = r.y + r.h - 1 + kFaceMargin;

  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      double v = spec.background ? background_at(items, x, y, spec.width, spec.height) : 0.5;
      if (x >= face_x0 && x <= face_x1 && y >= face_y0 && y <= face_y1) {
        // Sheared face frame: features lean with the pose.
        const double fx = x - shear * (y - hy);
        const double ex = (fx - hx) / ha;
        const double ey = (y - hy) / hb;
        const double head = coverage((std::sqrt(ex * ex + ey * ey) - 1.0) * std::min(ha, hb));
        if (head > 0.0) {
          double face = p.skin * (1.0 - 0.08 * ey);
          if (ey < -p.hair_line) face = p.hair;
          // Brows.
          for (double side : {-1.0, 1.0}) {
            const double bx = spec.center.x + side * 0.5 * s;
            const double d = std::max(std::abs(fx - bx) - 0.2 * s, std::abs(y - brow_y) - 0.035 * s);
            const double c = coverage(d);
            face = (1.0 - c) * face + c * p.brow_tone;
          }
          // Mouth bar.
          {
            const double d = std::max(std::abs(fx - mouth_x) - p.mouth_half * s, std::abs(y - mouth_y) - 0.05 * s);
            const double c = coverage(d);
            face = (1.0 - c) * face + c * p.mouth_tone;
          }
          // Eyes: Gaussian blobs centered exactly on the annotation.
          for (const auto& [ex0, rad] : {std::pair{scene.eyes.left_eye.x, r_left}, std::pair{scene.eyes.right_eye.x, r_right}}) {
            const double dx = x - ex0;
            const double dy = y - spec.center.y;
            face *= 1.0 - p.eye_depth * std::exp(-(dx * dx + dy * dy) / (2.0 * rad * rad));
          }
          v = (1.0 - head) * v + head * face;
        }
      }
      img(y, x) = v;
    }
  }

  Rng noise(mix(spec.noise_seed, 0x5eedull));
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    double v = 0.5 + spec.contrast * (img.data()[i] - 0.5) + spec.brightness;
    if (spec.noise_sigma > 0.0) v += spec.noise_sigma * noise.normal();
    img.data()[i] = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
  }
  scene.image = std::move(img);
  return scene;
}

// ---------------------------------------------------------------------------

namespace {

SceneSpec draw_scene(const CorpusSpec& spec, std::uint64_t seed, int split, int index) {
  Rng r(mix(mix(seed, static_cast<std::uint64_t>(split)), static_cast<std::uint64_t>(index)));
  SceneSpec s;
  s.width = spec.width;
  s.height = spec.height;
  s.location_seed = spec.location_seed;
  s.background = spec.background;

  const IdentityPool& pool = split == 0 ? spec.train_identities : spec.test_identities;
  s.identity = pool.first + r.below(pool.count);

  if (!spec.octaves.empty()) {
    const std::size_t n_pose = std::max<std::size_t>(1, spec.poses.size());
    const std::size_t cell = static_cast<std::size_t>(index) % (spec.octaves.size() * n_pose);
    const double octave = spec.octaves[cell / n_pose] + r.uniform(-spec.octave_jitter, spec.octave_jitter);
    s.iod = std::exp2(octave);
    if (spec.poses.empty()) {
      s.pose_degrees = r.uniform(spec.pose_min, spec.pose_max);
    } else {
      s.pose_degrees = spec.poses[cell % n_pose] + r.uniform(-spec.pose_jitter, spec.pose_jitter);
    }
  } else {
    s.iod = std::exp2(r.uniform(std::log2(spec.iod_min), std::log2(spec.iod_max)));
    if (spec.poses.empty()) {
      s.pose_degrees = r.uniform(spec.pose_min, spec.pose_max);
    } else {
      s.pose_degrees = spec.poses[static_cast<std::size_t>(r.below(static_cast<int>(spec.poses.size())))] +
                       r.uniform(-spec.pose_jitter, spec.pose_jitter);
    }
  }
  s.pose_degrees = std::clamp(s.pose_degrees, -kMaxPose, kMaxPose);

  // Place the face so its rectangle stays on the canvas.
  const Pixel extent = face_extent(s.iod, spec.crop);
  const double half_w = extent.x / 2 + 1.0;
  const double half_h = extent.y / 2 + 1.0;
  const double lo_x = half_w;
  const double hi_x = spec.width - (extent.x - extent.x / 2) - 1.0;
  const double lo_y = half_h;
  const double hi_y = spec.height - (extent.y - extent.y / 2) - 1.0;
  if (hi_x < lo_x || hi_y < lo_y) {
    throw Error(ErrorKind::OutOfBounds, "generate_corpus: canvas too small for interocular width " + std::to_string(s.iod));
  }
  s.center = {r.uniform(lo_x, hi_x), r.uniform(lo_y, hi_y)};
  s.brightness = r.uniform(-spec.brightness_jitter, spec.brightness_jitter);
  s.contrast = r.uniform(spec.contrast_min, spec.contrast_max);
  s.noise_sigma = spec.noise_sigma;
  s.noise_seed = r.next();
  return s;
}

nlohmann::json to_json(const SceneSpec& s) {
  return {{"width", s.width},         {"height", s.height},         {"location_seed", s.location_seed},
          {"background", s.background}, {"center_x", s.center.x},   {"center_y", s.center.y},
          {"iod", s.iod},             {"pose_degrees", s.pose_degrees}, {"identity", s.identity},
          {"brightness", s.brightness}, {"contrast", s.contrast},   {"noise_sigma", s.noise_sigma},
          {"noise_seed", s.noise_seed}};
}

}  // namespace

nlohmann::json to_json(const CorpusSpec& c) {
  return {{"width", c.width},
          {"height", c.height},
          {"location_seed", c.location_seed},
          {"background", c.background},
          {"iod_min", c.iod_min},
          {"iod_max", c.iod_max},
          {"octaves", c.octaves},
          {"octave_jitter", c.octave_jitter},
          {"pose_min", c.pose_min},
          {"pose_max", c.pose_max},
          {"poses", c.poses},
          {"pose_jitter", c.pose_jitter},
          {"brightness_jitter", c.brightness_jitter},
          {"contrast_min", c.contrast_min},
          {"contrast_max", c.contrast_max},
          {"noise_sigma", c.noise_sigma},
          {"train_identities", {{"first", c.train_identities.first}, {"count", c.train_identities.count}}},
          {"test_identities", {{"first", c.test_identities.first}, {"count", c.test_identities.count}}},
          {"crop", {{"half_width_iod", c.crop.half_width_iod}, {"half_height_iod", c.crop.half_height_iod}}}};
}

CorpusSpec corpus_spec_from_json(const nlohmann::json& j) {
  CorpusSpec c;
  c.width = j.value("width", c.width);
  c.height = j.value("height", c.height);
  c.location_seed = j.value("location_seed", c.location_seed);
  c.background = j.value("background", c.background);
  c.iod_min = j.value("iod_min", c.iod_min);
  c.iod_max = j.value("iod_max", c.iod_max);
  c.octaves = j.value("octaves", c.octaves);
  c.octave_jitter = j.value("octave_jitter", c.octave_jitter);
  c.pose_min = j.value("pose_min", c.pose_min);
  c.pose_max = j.value("pose_max", c.pose_max);
  c.poses = j.value("poses", c.poses);
  c.pose_jitter = j.value("pose_jitter", c.pose_jitter);
  c.brightness_jitter = j.value("brightness_jitter", c.brightness_jitter);
  c.contrast_min = j.value("contrast_min", c.contrast_min);
  c.contrast_max = j.value("contrast_max", c.contrast_max);
  c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
  if (j.contains("train_identities")) {
    c.train_identities = {j["train_identities"].at("first").get<int>(), j["train_identities"].at("count").get<int>()};
  }
  if (j.contains("test_identities")) {
    c.test_identities = {j["test_identities"].at("first").get<int>(), j["test_identities"].at("count").get<int>()};
  }
  if (j.contains("crop")) {
    c.crop = {j["crop"].at("half_width_iod").get<double>(), j["crop"].at("half_height_iod").get<double>()};
  }
  return c;
}

CorpusSpec repeated_setting_spec() {
  CorpusSpec c;
  c.width = 384;
  c.height = 288;
  return c;
}

CorpusSpec bank_grid_spec() {
  CorpusSpec c;
  c.width = 384;
  c.height = 384;
  for (int i = 0; i <= 12; ++i) c.octaves.push_back(4.0 + 0.25 * i);
  c.octave_jitter = 0.05;
  c.poses = {-22.0, 0.0, 22.0};
  c.pose_jitter = 4.0;
  return c;
}

std::string Corpus::hash() const {
  return config_hash({{"spec", to_json(spec)}, {"seed", seed}, {"n_train", train.size()}, {"n_test", test.size()}});
}

nlohmann::json Corpus::manifest() const {
  nlohmann::json j;
  j["spec"] = to_json(spec);
  j["seed"] = seed;
  j["config_hash"] = hash();
  auto list = [](const std::vector<CorpusImage>& images) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& im : images) arr.push_back({{"path", im.name}, {"scene", to_json(im.spec)}});
    return arr;
  };
  j["train"] = list(train);
  j["test"] = list(test);
  return j;
}

Corpus generate_corpus(const CorpusSpec& spec, int n_train, int n_test, std::uint64_t seed, unsigned workers) {
  const auto& a = spec.train_identities;
  const auto& b = spec.test_identities;
  if (a.count <= 0 || b.count <= 0) throw Error(ErrorKind::InvalidArgument, "generate_corpus: empty identity pool");
  if (a.first < b.first + b.count && b.first < a.first + a.count) {
    throw Error(ErrorKind::IdentityOverlap, "generate_corpus: train and test identity pools overlap");
  }
  if (n_train < 0 || n_test < 0) throw Error(ErrorKind::InvalidArgument, "generate_corpus: negative image count");

  Corpus corpus;
  corpus.spec = spec;
  corpus.seed = seed;
  corpus.train.resize(static_cast<std::size_t>(n_train));
  corpus.test.resize(static_cast<std::size_t>(n_test));
  auto fill = [&](std::vector<CorpusImage>& out, int split, const char* dir) {
    parallel_for(out.size(), workers, [&](std::size_t i) {
      char name[64];
      std::snprintf(name, sizeof name, "%s/%05zu.pgm", dir, i);
      out[i].name = name;
      out[i].spec = draw_scene(spec, seed, split, static_cast<int>(i));
      out[i].scene = render_scene(out[i].spec, spec.crop);
    });
  };
  fill(corpus.train, 0, "train");
  fill(corpus.test, 1, "test");
  return corpus;
}

Dataset to_dataset(const std::vector<CorpusImage>& images) {
  Dataset d;
  d.reserve(images.size());
  for (const auto& im : images) d.push_back({im.name, im.scene.image, im.scene.eyes, im.spec.pose_degrees});
  return d;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "train");
  std::filesystem::create_directories(dir / "test");
  auto write_split = [&](const std::vector<CorpusImage>& images, const char* csv) {
    std::vector<AnnotationRow> rows;
    for (const auto& im : images) {
      save_pgm(im.scene.image, dir / im.name);
      rows.push_back({im.name, im.scene.eyes, im.spec.pose_degrees});
    }
    write_annotations(rows, dir / csv);
  };
  write_split(corpus.train, "train.csv");
  write_split(corpus.test, "test.csv");
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error(ErrorKind::Io, "cannot write corpus manifest");
  out << corpus.manifest().dump(2) << '\n';
}

}  // namespace cfad
