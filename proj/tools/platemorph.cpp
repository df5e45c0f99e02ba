#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "platemorph/pipeline.hpp"

using namespace platemorph;

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> surface, gallery, outdir, format;
  std::optional<int> nx, ny;
  std::optional<double> thickness, tol_form, tol_stress, tol_recon, seed_x, seed_y;
};

void add_flags(CLI::App* app, Flags& f) {
  app->add_option("-c,--config", f.config, "Key/value run configuration file");
  app->add_option("--surface", f.surface, "Surface definition file (x, y, z, domain)");
  app->add_option("--gallery", f.gallery, "Built-in surface name");
  app->add_option("--nx", f.nx, "Grid points along X (default 101)");
  app->add_option("--ny", f.ny, "Grid points along Y (default 101)");
  app->add_option("--thickness", f.thickness, "Plate thickness h (default 0.01)");
  app->add_option("--outdir", f.outdir, "Output directory (default out)");
  app->add_option("--format", f.format, "Comma-separated export formats: csv, vtk, or none");
  app->add_option("--tol-form", f.tol_form, "Relative threshold for vanishing F and M (default 1e-9)");
  app->add_option("--tol-stress", f.tol_stress, "Stress residual threshold (default 1e-8)");
  app->add_option("--tol-recon", f.tol_recon, "Reconstruction deviation over diagonal (default 1e-4)");
  app->add_option("--seed-x", f.seed_x, "Seed X for curvature-line labels (default domain centre)");
  app->add_option("--seed-y", f.seed_y, "Seed Y for curvature-line labels (default domain centre)");
}

PipelineConfig make_config(const Flags& f) {
  PipelineConfig c;
  if (!f.config.empty()) c = load_config(f.config);
  if (f.surface) {
    c.surface_path = *f.surface;
    c.gallery.clear();
    c.inline_surface.reset();
  }
  if (f.gallery) {
    c.gallery = *f.gallery;
    c.surface_path.clear();
    c.inline_surface.reset();
  }
  if (f.nx) c.nx = *f.nx;
  if (f.ny) c.ny = *f.ny;
  if (f.thickness) c.thickness = *f.thickness;
  if (f.outdir) c.outdir = *f.outdir;
  if (f.format) c.formats = parse_formats(*f.format);
  if (f.tol_form) c.tol_form = *f.tol_form;
  if (f.tol_stress) c.tol_stress = *f.tol_stress;
  if (f.tol_recon) c.tol_recon = *f.tol_recon;
  if (f.seed_x) c.seed_x = *f.seed_x;
  if (f.seed_y) c.seed_y = *f.seed_y;
  return c;
}

void print_stages(const RunManifest& m) {
  for (const auto& s : m.stages) {
    std::printf("%-12s %-7s %8.3fs  %s\n", s.name.c_str(), to_string(s.status), s.seconds, s.summary.dump().c_str());
    if (!s.message.empty()) std::printf("%-12s %s\n", "", s.message.c_str());
  }
}

enum class Upto { Analyze, Reparam, Synthesize, Verify, Reconstruct, Run };

int execute(const Flags& f, Upto upto) {
  Pipeline p(make_config(f));
  int code = 0;
  try {
    p.load();
    p.analyze();
    if (upto != Upto::Analyze) {
      p.reparam(upto == Upto::Reparam);
      if (upto != Upto::Reparam) {
        p.synthesize();
        if (upto == Upto::Verify || upto == Upto::Run) p.verify();
        if (upto == Upto::Reconstruct || upto == Upto::Run) p.reconstruct();
      }
    }
    p.finish();
    code = p.manifest().exit_code;
  } catch (const Error&) {
    p.finish();
    print_stages(p.manifest());
    throw;
  }
  print_stages(p.manifest());
  std::printf("status: %s (manifest in %s)\n", p.manifest().status().c_str(), p.config().outdir.c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Growth programming for thin hyperelastic plates"};
  app.require_subcommand(1);

  Flags flags;
  struct Sub {
    const char* name;
    const char* help;
    Upto upto;
  };
  const Sub subs[] = {
      {"analyze", "Sample the fundamental forms", Upto::Analyze},
      {"reparam", "Trace the curvature-line net and export the coordinate maps", Upto::Reparam},
      {"synthesize", "Compute the growth field", Upto::Synthesize},
      {"verify", "Compute the growth field and certify it stress-free", Upto::Verify},
      {"reconstruct", "Compute the growth field and rebuild the surface from it", Upto::Reconstruct},
      {"run", "Full pipeline", Upto::Run},
  };
  std::optional<Upto> chosen;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_flags(sub, flags);
    sub->callback([&chosen, u = s.upto] { chosen = u; });
  }

  CLI::App* gal = app.add_subcommand("gallery", "List built-in surfaces, or print one as a surface file");
  std::string gal_name;
  gal->add_option("name", gal_name, "Surface to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  try {
    if (gal->parsed()) {
      if (gal_name.empty()) {
        for (const auto& n : gallery_names()) std::cout << n << '\n';
      } else {
        std::cout << gallery(gal_name).to_text();
      }
      return 0;
    }
    return execute(flags, *chosen);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
