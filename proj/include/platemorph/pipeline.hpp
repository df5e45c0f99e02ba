#pragma once

// Surface -> forms -> (curvature-line reparametrization) -> growth -> stress
// certificate -> reconstruction, with file export and a JSON run manifest.

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "forms.hpp"
#include "gallery.hpp"
#include "growth.hpp"
#include "io.hpp"
#include "keyvalue.hpp"
#include "plate.hpp"
#include "reconstruct.hpp"
#include "reparam.hpp"
#include "surface.hpp"

namespace platemorph {

struct PipelineConfig {
  std::string surface_path;  // key/value surface file
  std::string gallery;       // or a preset name
  std::optional<KeyValues> inline_surface;
  int nx = 101, ny = 101;
  double thickness = 0.01;
  double tol_form = 1e-9;    // F, M vanish below tol_form * diag (diag^2 for F)
  double tol_stress = 1e-8;  // S1 threshold; the other stress thresholds scale with it
  double tol_recon = 1e-4;   // max deviation as a fraction of the diagonal
  std::string outdir = "out";
  std::set<std::string> formats{"csv", "vtk"};
  std::optional<double> seed_x, seed_y;

  void validate() const {
    int sources = !surface_path.empty() + !gallery.empty() + inline_surface.has_value();
    if (sources == 0) throw Error(ErrorKind::Config, "no surface given (use a surface file or a gallery name)");
    if (sources > 1) throw Error(ErrorKind::Config, "give exactly one surface source");
    require_resolution(nx, ny);
    if (!(thickness > 0.0)) throw Error(ErrorKind::Config, "thickness must be positive");
    if (!(tol_form > 0.0) || !(tol_stress > 0.0) || !(tol_recon > 0.0))
      throw Error(ErrorKind::Config, "tolerances must be positive");
    for (const auto& f : formats)
      if (f != "csv" && f != "vtk") throw Error(ErrorKind::Config, "unknown export format '" + f + "' (csv, vtk)");
  }

  ParametricSurface load_surface() const {
    if (!gallery.empty()) return platemorph::gallery(gallery);
    if (inline_surface) return ParametricSurface::from_key_values(*inline_surface);
    return ParametricSurface::load(surface_path);
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    if (!gallery.empty()) j["gallery"] = gallery;
    if (!surface_path.empty()) j["surface"] = surface_path;
    if (inline_surface) j["surface"] = "inline";
    j["nx"] = nx;
    j["ny"] = ny;
    j["thickness"] = thickness;
    j["tol_form"] = tol_form;
    j["tol_stress"] = tol_stress;
    j["tol_recon"] = tol_recon;
    j["outdir"] = outdir;
    j["format"] = std::vector<std::string>(formats.begin(), formats.end());
    if (seed_x) j["seed_x"] = *seed_x;
    if (seed_y) j["seed_y"] = *seed_y;
    return j;
  }
};

inline double parse_number(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(v.substr(used)) != "") throw Error(ErrorKind::Config, "'" + key + "' expects a number, got '" + v + "'");
  return d;
}

inline int parse_int(const std::string& key, const std::string& v) {
  double d = parse_number(key, v);
  if (d != std::floor(d) || std::abs(d) > 1e8) throw Error(ErrorKind::Config, "'" + key + "' expects an integer");
  return static_cast<int>(d);
}

inline std::set<std::string> parse_formats(const std::string& v) {
  std::set<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty() || item == "none") continue;
    out.insert(item);
  }
  return out;
}

// Applies recognised keys; a config may also carry x, y, z (and domain) to
// define the surface inline.
inline void apply_key_values(PipelineConfig& c, const KeyValues& kv) {
  static const std::set<std::string> known{"surface", "gallery",  "nx",        "ny",     "thickness", "tol_form",
                                           "tol_stress", "tol_recon", "outdir", "format", "seed_x",    "seed_y",
                                           "x",       "y",        "z",         "domain", "name"};
  for (const auto& [k, v] : kv)
    if (!known.count(k)) throw Error(ErrorKind::Config, "unknown config key '" + k + "'");
  if (kv.count("surface")) c.surface_path = kv.at("surface");
  if (kv.count("gallery")) c.gallery = kv.at("gallery");
  if (kv.count("x") || kv.count("y") || kv.count("z")) c.inline_surface = kv;
  if (kv.count("nx")) c.nx = parse_int("nx", kv.at("nx"));
  if (kv.count("ny")) c.ny = parse_int("ny", kv.at("ny"));
  if (kv.count("thickness")) c.thickness = parse_number("thickness", kv.at("thickness"));
  if (kv.count("tol_form")) c.tol_form = parse_number("tol_form", kv.at("tol_form"));
  if (kv.count("tol_stress")) c.tol_stress = parse_number("tol_stress", kv.at("tol_stress"));
  if (kv.count("tol_recon")) c.tol_recon = parse_number("tol_recon", kv.at("tol_recon"));
  if (kv.count("outdir")) c.outdir = kv.at("outdir");
  if (kv.count("format")) c.formats = parse_formats(kv.at("format"));
  if (kv.count("seed_x")) c.seed_x = parse_number("seed_x", kv.at("seed_x"));
  if (kv.count("seed_y")) c.seed_y = parse_number("seed_y", kv.at("seed_y"));
}

inline PipelineConfig load_config(const std::string& path) {
  PipelineConfig c;
  apply_key_values(c, parse_key_values(read_text_file(path)));
  return c;
}

enum class StageStatus { Ok, Fail, Error, Skipped };

inline const char* to_string(StageStatus s) {
  switch (s) {
    case StageStatus::Ok: return "ok";
    case StageStatus::Fail: return "fail";
    case StageStatus::Error: return "error";
    case StageStatus::Skipped: return "skipped";
  }
  return "unknown";
}

struct StageRecord {
  std::string name;
  StageStatus status = StageStatus::Ok;
  double seconds = 0.0;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  std::string message;
};

struct FileRecord {
  std::string path;
  std::string sha256;
  std::size_t bytes = 0;
};

struct RunManifest {
  nlohmann::ordered_json config;
  std::vector<StageRecord> stages;
  std::vector<FileRecord> files;
  int exit_code = 0;

  const StageRecord* stage(const std::string& name) const {
    for (const auto& s : stages)
      if (s.name == name) return &s;
    return nullptr;
  }

  std::string status() const {
    if (exit_code == 0) return "pass";
    return exit_code == 2 ? "fail" : "error";
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["status"] = status();
    j["exit_code"] = exit_code;
    j["config"] = config;
    j["stages"] = nlohmann::ordered_json::array();
    for (const auto& s : stages) {
      nlohmann::ordered_json e;
      e["name"] = s.name;
      e["status"] = to_string(s.status);
      e["seconds"] = s.seconds;
      e["summary"] = s.summary;
      if (!s.message.empty()) e["message"] = s.message;
      j["stages"].push_back(e);
    }
    j["files"] = nlohmann::ordered_json::array();
    for (const auto& f : files) j["files"].push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    return j;
  }
};

// Everything the stages produce; later stages read what earlier ones left.
struct Artifacts {
  ParametricSurface surface;
  double diag = 0.0;
  FormsGrid forms;
  CompatibilityResidual forms_compat;
  bool reparametrized = false;
  std::shared_ptr<ReparamMap> map;
  std::optional<PulledBack> patch;  // rectangle used for verification and reconstruction
  GrowthField growth;               // exported field (masked after reparametrization)
  GrowthField growth_rect;          // unmasked field on the verification grid
  ParamGrid verify_axes;
  Grid2<Vec3<Jet2<double>>> verify_jets;
  std::optional<StressReport> stress;
  std::optional<ReconstructionReport> recon;
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig c) : cfg_(std::move(c)) {
    cfg_.validate();
    manifest_.config = cfg_.to_json();
  }

  const PipelineConfig& config() const { return cfg_; }
  const Artifacts& artifacts() const { return art_; }
  const RunManifest& manifest() const { return manifest_; }
  bool halted() const { return halted_; }

  void load() {
    stage("load", [&](StageRecord& r) {
      art_.surface = cfg_.load_surface();
      art_.diag = art_.surface.diagonal();
      r.summary["name"] = art_.surface.name();
      r.summary["diagonal"] = art_.diag;
    });
  }

  void analyze() {
    stage("forms", [&](StageRecord& r) {
      art_.forms = sample_forms(art_.surface, cfg_.nx, cfg_.ny);
      art_.forms_compat = gauss_codazzi_residual(art_.forms);
      double maxF = 0.0, maxM = 0.0;
      for (const auto& f : art_.forms.f.data) {
        maxF = std::max(maxF, std::abs(f.F));
        maxM = std::max(maxM, std::abs(f.M));
      }
      r.summary["max_abs_F"] = maxF;
      r.summary["max_abs_M"] = maxM;
      const bool nonorthogonal = needs_reparam(art_.forms, form_tolerance());
      r.summary["needs_reparam"] = nonorthogonal;
      // the orthogonal-net residual is only meaningful when F = M = 0
      if (!nonorthogonal) r.summary["gauss_codazzi"] = art_.forms_compat.max();
      export_text("forms.csv", "csv", [&](std::ostream& o) { write_forms_csv(o, art_.forms); });
    });
  }

  // Curvature-line reparametrization; `force` runs it even for orthogonal nets.
  void reparam(bool force = false) {
    if (halted_) return;
    const bool needed = needs_reparam(art_.forms, form_tolerance());
    if (!needed && !force) return;
    stage("reparam", [&](StageRecord& r) {
      const Domain& d = art_.surface.domain();
      std::array<double, 2> seed{cfg_.seed_x.value_or(0.5 * (d.x_lo + d.x_hi)), cfg_.seed_y.value_or(0.5 * (d.y_lo + d.y_hi))};
      auto dirs = direction_field(art_.forms, forms_at(art_.surface, seed[0], seed[1]), seed);
      art_.map = std::make_shared<ReparamMap>(build_reparam(art_.surface, art_.forms, dirs, seed));
      art_.reparametrized = true;
      auto masked = pullback_surface(art_.surface, *art_.map);
      auto [f_rel, m_rel] = cross_terms(masked, art_.diag);
      art_.patch = pullback_rectangle(art_.surface, *art_.map, cfg_.nx, cfg_.ny);
      std::size_t valid = 0;
      for (auto v : masked.valid.data) valid += v;
      r.summary["seed"] = {seed[0], seed[1]};
      r.summary["direction_umbilics"] = dirs.umbilic_count();
      r.summary["direction_max_jump"] = dirs.max_jump();
      r.summary["S_range"] = {art_.map->star.u.lo, art_.map->star.u.hi};
      r.summary["T_range"] = {art_.map->star.v.lo, art_.map->star.v.hi};
      r.summary["valid_nodes"] = valid;
      r.summary["min_jacobian"] = art_.map->min_jacobian();
      r.summary["max_rel_F"] = f_rel;
      r.summary["max_rel_M"] = m_rel;
      r.summary["patch_S"] = {art_.patch->axes.u.lo, art_.patch->axes.u.hi};
      r.summary["patch_T"] = {art_.patch->axes.v.lo, art_.patch->axes.v.hi};
      export_text("reparam_forward.csv", "csv", [&](std::ostream& o) { write_forward_csv(o, *art_.map); });
      export_text("reparam_inverse.csv", "csv", [&](std::ostream& o) { write_inverse_csv(o, *art_.map); });
      masked_forms_ = forms_of(masked, art_.diag);
      masked_valid_ = masked.valid;
    });
  }

  void synthesize() {
    stage("synthesize", [&](StageRecord& r) {
      const FormTolerance tol = form_tolerance();
      if (art_.reparametrized) {
        art_.growth = platemorph::synthesize(masked_forms_, cfg_.thickness, tol, masked_valid_);
        art_.growth.u_name = "S";
        art_.growth.v_name = "T";
        auto rect_forms = forms_of(*art_.patch, art_.diag);
        art_.growth_rect = platemorph::synthesize(rect_forms, cfg_.thickness, tol);
        art_.growth_rect.u_name = "S";
        art_.growth_rect.v_name = "T";
        art_.verify_axes = art_.patch->axes;
        art_.verify_jets = art_.patch->jets;
      } else {
        art_.growth = platemorph::synthesize(art_.forms, cfg_.thickness, tol);
        art_.growth_rect = art_.growth;
        art_.verify_axes = art_.forms.axes;
        art_.verify_jets = Grid2<Vec3<Jet2<double>>>(cfg_.nx, cfg_.ny);
        for (int j = 0; j < cfg_.ny; ++j)
          for (int i = 0; i < cfg_.nx; ++i)
            art_.verify_jets(i, j) = art_.surface.jets(art_.forms.axes.u.at(i), art_.forms.axes.v.at(j));
      }
      r.summary["parameters"] = art_.growth.u_name + "," + art_.growth.v_name;
      r.summary["nodes"] = art_.growth.valid_count();
      r.summary["thickness"] = cfg_.thickness;
      auto range = [&](const Grid2<double>& g) {
        double lo = 1e300, hi = -1e300;
        for (int j = 0; j < g.ny; ++j)
          for (int i = 0; i < g.nx; ++i)
            if (art_.growth.is_valid(i, j)) {
              lo = std::min(lo, g(i, j));
              hi = std::max(hi, g(i, j));
            }
        return nlohmann::ordered_json::array({lo, hi});
      };
      r.summary["l1_0"] = range(art_.growth.l1_0);
      r.summary["l2_0"] = range(art_.growth.l2_0);
      r.summary["l1_1"] = range(art_.growth.l1_1);
      r.summary["l2_1"] = range(art_.growth.l2_1);
      export_text("growth.csv", "csv", [&](std::ostream& o) { write_growth_csv(o, art_.growth); });
      export_text("growth.vtk", "vtk", [&](std::ostream& o) { write_growth_vtk(o, art_.growth); });
    });
  }

  void verify() {
    stage("verify", [&](StageRecord& r) {
      art_.stress = verify_stress(art_.verify_axes, art_.verify_jets, synthesized_model(), cfg_.thickness);
      const StressReport& s = *art_.stress;
      const StressTolerance tol = StressTolerance::from_s1(cfg_.tol_stress);
      r.summary["max_S0"] = s.max_s0;
      r.summary["max_S1"] = s.max_s1;
      r.summary["s1_balance"] = s.max_balance;
      r.summary["closure"] = s.max_closure;
      r.summary["plate_residual"] = s.plate_residual;
      r.summary["edge_traction"] = s.traction;
      r.summary["edge_moment"] = s.moment;
      r.summary["tolerance"] = {{"S0", tol.s0}, {"S1", tol.s1}, {"s1_balance", tol.balance}, {"plate", tol.plate}, {"boundary", tol.boundary}};
      export_text("stress.csv", "csv", [&](std::ostream& o) {
        write_stress_csv(o, s, art_.growth_rect.u_name, art_.growth_rect.v_name);
      });
      export_text("stress_summary.txt", "csv", [&](std::ostream& o) { o << stress_summary(s); });
      if (!s.passes(tol)) {
        r.status = StageStatus::Fail;
        r.message = "stress residuals exceed tolerance";
      }
    });
  }

  void reconstruct() {
    stage("reconstruct", [&](StageRecord& r) {
      Grid2<Vec3d> target = art_.verify_jets.map([](const Vec3<Jet2<double>>& p) { return Vec3d(p[0].v, p[1].v, p[2].v); });
      art_.recon = platemorph::reconstruct(art_.growth_rect, target);
      const ReconstructionReport& rep = *art_.recon;
      r.summary["max_deviation"] = rep.max_dev;
      r.summary["mean_deviation"] = rep.mean_dev;
      r.summary["march_order_gap"] = rep.drift;
      r.summary["frame_error"] = rep.metric_error;
      r.summary["gauss_codazzi"] = rep.compatibility.max();
      r.summary["diagonal"] = rep.diag;
      r.summary["rotation_det"] = rep.transform.R.determinant();
      export_text("reconstruction.csv", "csv", [&](std::ostream& o) {
        write_reconstruction_csv(o, rep, art_.growth_rect.u_name, art_.growth_rect.v_name);
      });
      export_text("reconstruction.vtk", "vtk", [&](std::ostream& o) { write_reconstruction_vtk(o, rep); });
      if (rep.max_dev > cfg_.tol_recon) {
        r.status = StageStatus::Fail;
        r.message = "reconstruction deviation exceeds tolerance";
      }
    });
  }

  // All stages in order; returns the process exit code.
  int run() {
    try {
      load();
      analyze();
      reparam();
      synthesize();
      verify();
      reconstruct();
    } catch (const Error&) {
      finish();
      throw;
    }
    finish();
    return manifest_.exit_code;
  }

  // Writes manifest.json (not itself listed among the files).
  void write_manifest() const {
    std::filesystem::create_directories(cfg_.outdir);
    write_file(std::filesystem::path(cfg_.outdir) / "manifest.json", manifest_.to_json().dump(2) + "\n");
  }

  void finish() {
    for (const auto& s : manifest_.stages)
      if (s.status == StageStatus::Fail && manifest_.exit_code == 0) manifest_.exit_code = 2;
    write_manifest();
  }

 private:
  FormTolerance form_tolerance() const { return FormTolerance::for_scale(art_.diag, cfg_.tol_form); }

  // Runs one stage. A tolerance breach marks the stage failed and halts the
  // remaining stages; any other error is rethrown with the stage name.
  template <class F>
  void stage(const std::string& name, F body) {
    if (halted_) return;
    StageRecord rec;
    rec.name = name;
    auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
    try {
      body(rec);
    } catch (const Error& e) {
      rec.status = e.kind() == ErrorKind::Tolerance ? StageStatus::Fail : StageStatus::Error;
      rec.message = e.what();
      rec.seconds = elapsed();
      manifest_.stages.push_back(rec);
      manifest_.exit_code = exit_code(e.kind());
      if (e.kind() == ErrorKind::Tolerance) {
        halted_ = true;
        return;
      }
      throw Error(e.kind(), name + ": " + e.what());
    }
    rec.seconds = elapsed();
    manifest_.stages.push_back(std::move(rec));
  }

  template <class W>
  void export_text(const std::string& file, const std::string& format, W writer) {
    if (!cfg_.formats.count(format)) return;
    std::ostringstream out;
    writer(out);
    const std::string content = out.str();
    std::error_code ec;
    std::filesystem::create_directories(cfg_.outdir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + cfg_.outdir + ": " + ec.message());
    write_file(std::filesystem::path(cfg_.outdir) / file, content);
    manifest_.files.push_back({file, sha256_hex(content), content.size()});
  }

  PipelineConfig cfg_;
  Artifacts art_;
  RunManifest manifest_;
  FormsGrid masked_forms_;
  Grid2<unsigned char> masked_valid_;
  bool halted_ = false;
};

}  // namespace platemorph
