// Command-line front end: field computation, degeneracy scans, ridge
// extraction, FSLE->FTLE continuation, and the time-step sensitivity study.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lcs/flow_models.hpp"
#include "lcs/integrator.hpp"
#include "lcs/parallel.hpp"
#include "lcs/ridges.hpp"
#include "lcs/scalar_field.hpp"
#include "lcs/separation.hpp"

namespace {

struct FlowArgs {
  std::string id = "double-gyre";
  std::string params;  // "k=v,k=v"
  bool flip_hamiltonian = false;
};

struct GridArg {
  std::string text = "0:1:101,0:1:101";
};

std::map<std::string, double> parse_params(const std::string& text) {
  std::map<std::string, double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw CLI::ValidationError("--param", "expected k=v[,k=v...], got '" + item + "'");
    out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

lcs::GridSpec parse_grid(const std::string& text) {
  lcs::GridSpec g;
  if (std::sscanf(text.c_str(), "%lg:%lg:%d,%lg:%lg:%d", &g.x1min, &g.x1max, &g.nx,
                  &g.x2min, &g.x2max, &g.ny) != 6 ||
      !g.valid())
    throw CLI::ValidationError("--grid",
                               "expected x1min:x1max:nx,x2min:x2max:ny, got '" + text + "'");
  return g;
}

lcs::FlowModel build_flow(const FlowArgs& fa) {
  lcs::FlowModel m = lcs::make_flow(fa.id, parse_params(fa.params));
  if (fa.flip_hamiltonian) m.hamiltonian_sign = -1.0;
  return m;
}

lcs::EventMode parse_event_mode(const std::string& s) {
  if (s == "step") return lcs::EventMode::StepResolution;
  if (s == "bisect") return lcs::EventMode::Bisection;
  throw CLI::ValidationError("--event-mode", "expected step|bisect, got '" + s + "'");
}

void add_flow_options(CLI::App* cmd, FlowArgs& fa) {
  cmd->add_option("--flow", fa.id, "flow model id (see list-flows)");
  cmd->add_option("--param", fa.params, "model parameters as k=v[,k=v...]");
  cmd->add_flag("--flip-hamiltonian", fa.flip_hamiltonian,
                "flip the stream-function sign convention");
}

struct FieldStats {
  double lo = 0.0, hi = 0.0;
  std::size_t missing = 0;
};

FieldStats stats(const lcs::ScalarGrid& g) {
  FieldStats st;
  std::tie(st.lo, st.hi) = g.value_range();
  for (double v : g.values)
    if (lcs::ScalarGrid::missing(v)) ++st.missing;
  return st;
}

void emit_field(const lcs::ScalarGrid& g, const std::string& kind,
                const std::string& out, const std::string& image, double img_lo,
                double img_hi) {
  lcs::write_grid(g, out);
  const FieldStats st = stats(g);
  if (!image.empty()) {
    double lo = img_lo, hi = img_hi;
    if (!(lo < hi)) {
      lo = st.lo;
      hi = st.hi > st.lo ? st.hi : st.lo + 1.0;
    }
    lcs::write_image(g, image, lo, hi);
  }
  const double total = static_cast<double>(g.values.size());
  std::printf("kind=%s nx=%d ny=%d min=%.17g max=%.17g missing=%zu undefined_pct=%.4g out=%s\n",
              kind.c_str(), g.spec.nx, g.spec.ny, st.lo, st.hi, st.missing,
              100.0 * st.missing / total, out.c_str());
}

void write_ridge_csv(const std::vector<lcs::RidgeCurve>& curves, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fprintf(f, "curve_id,x1,x2\n");
  for (std::size_t c = 0; c < curves.size(); ++c)
    for (const auto& p : curves[c].points)
      std::fprintf(f, "%zu,%.17g,%.17g\n", c, p.x1, p.x2);
  std::fclose(f);
}

void write_flags_csv(const std::vector<lcs::DegeneracyFlag>& flags,
                     const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fprintf(f,
               "x1,x2,tau_before,tau_after,margin_before,margin_after,"
               "d2_lambda_dt2,grad_lambda_norm\n");
  for (const auto& fl : flags)
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", fl.location.x1,
                 fl.location.x2, fl.tau_before, fl.tau_after, fl.margin_before,
                 fl.margin_after, fl.d2_lambda_dt2, fl.grad_lambda_norm);
  std::fclose(f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FTLE/FSLE/ISLE fields, degeneracy scans, and ridge tools for 2-D flows"};
  app.require_subcommand(1);

  FlowArgs fa;
  GridArg ga;
  double t0 = 0.0, horizon = 1.0, r = 2.0, delta0 = 1e-3, dt = 1e-3, rho = 0.1;
  double img_lo = 0.0, img_hi = 0.0;
  int probes = 8, threads = 1;
  std::string event_mode = "bisect", out, image, in_path, flags_out;
  std::string quantity = "sigma";
  double dt_coarse = 0.1, dt_fine = 1e-3;

  auto add_common = [&](CLI::App* cmd, bool needs_out) {
    add_flow_options(cmd, fa);
    cmd->add_option("--grid", ga.text, "x1min:x1max:nx,x2min:x2max:ny");
    cmd->add_option("--t0", t0, "start time");
    cmd->add_option("--dt", dt, "integrator time step");
    cmd->add_option("--threads", threads, "worker threads for grid evaluation");
    auto* o = cmd->add_option("--out", out, "output grid file");
    if (needs_out) o->required();
  };
  auto add_image = [&](CLI::App* cmd) {
    cmd->add_option("--image", image, "optional PGM image output");
    cmd->add_option("--lo", img_lo, "image range low (default: field min)");
    cmd->add_option("--hi", img_hi, "image range high (default: field max)");
  };
  auto add_separation = [&](CLI::App* cmd) {
    cmd->add_option("--r", r, "separation factor (> 1)");
    cmd->add_option("--max-horizon", horizon, "maximal separation time searched");
    cmd->add_option("--event-mode", event_mode, "step|bisect");
  };

  auto* c_list = app.add_subcommand("list-flows", "list available flow model ids");

  auto* c_ftle = app.add_subcommand("ftle", "finite-time Lyapunov exponent field");
  add_common(c_ftle, true);
  c_ftle->add_option("--horizon", horizon, "FTLE horizon T")->required();
  add_image(c_ftle);

  auto* c_fsle = app.add_subcommand("fsle", "finite-size Lyapunov exponent field");
  add_common(c_fsle, true);
  add_separation(c_fsle);
  c_fsle->add_option("--delta0", delta0, "initial separation");
  c_fsle->add_option("--probes", probes, "probe ring size");
  c_fsle->add_option("--quantity", quantity, "sigma|tau");
  add_image(c_fsle);

  auto* c_isle = app.add_subcommand("isle", "infinitesimal-size Lyapunov exponent field");
  add_common(c_isle, true);
  add_separation(c_isle);
  c_isle->add_option("--quantity", quantity, "sigma|tau|margin");
  add_image(c_isle);

  auto* c_jumps = app.add_subcommand("jumps", "degeneracy (FSLE jump) scan");
  add_common(c_jumps, true);
  add_separation(c_jumps);

  auto* c_ridges = app.add_subcommand("ridges", "extract ridges from a stored field");
  c_ridges->add_option("--in", in_path, "input grid file")->required();
  c_ridges->add_option("--out", out, "output polyline CSV (curve_id,x1,x2)")->required();

  auto* c_cont = app.add_subcommand("continue", "FSLE->FTLE ridge continuation report");
  add_common(c_cont, false);
  add_separation(c_cont);
  c_cont->add_option("--delta0", delta0, "initial separation");
  c_cont->add_option("--probes", probes, "probe ring size");
  c_cont->add_option("--rho", rho, "tube half-width around the FSLE ridge");

  auto* c_sens = app.add_subcommand("sensitivity", "time-step sensitivity study");
  add_common(c_sens, true);
  add_separation(c_sens);
  c_sens->add_option("--delta0", delta0, "initial separation");
  c_sens->add_option("--probes", probes, "probe ring size");
  c_sens->add_option("--dt-coarse", dt_coarse, "coarse time step");
  c_sens->add_option("--dt-fine", dt_fine, "fine time step");
  c_sens->add_option("--flags-out", flags_out, "degeneracy-flag overlay CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_list->parsed()) {
      for (const auto& id : lcs::flow_ids()) std::printf("%s\n", id.c_str());
      return 0;
    }

    const lcs::GridSpec grid = parse_grid(ga.text);
    lcs::IntegratorConfig cfg;
    cfg.dt = dt;
    lcs::SeparationParams p;
    p.r = r;
    p.delta0 = delta0;
    p.n_probes = probes;
    p.horizon = horizon;
    p.event_mode = parse_event_mode(event_mode);

    if (c_ftle->parsed()) {
      const auto m = build_flow(fa);
      const auto g = lcs::compute_field(lcs::FieldKind::FTLE, m, grid, t0, horizon, p,
                                        cfg, threads);
      emit_field(g, "ftle", out, image, img_lo, img_hi);
      return 0;
    }
    if (c_fsle->parsed() || c_isle->parsed()) {
      const auto m = build_flow(fa);
      lcs::FieldKind kind;
      if (c_fsle->parsed())
        kind = quantity == "tau" ? lcs::FieldKind::TauFinite : lcs::FieldKind::FSLE;
      else if (quantity == "tau")
        kind = lcs::FieldKind::Tau0;
      else if (quantity == "margin")
        kind = lcs::FieldKind::Margin;
      else
        kind = lcs::FieldKind::ISLE;
      const auto g = lcs::compute_field(kind, m, grid, t0, horizon, p, cfg, threads);
      emit_field(g, c_fsle->parsed() ? "fsle" : "isle", out, image, img_lo, img_hi);
      return 0;
    }
    if (c_jumps->parsed()) {
      const auto m = build_flow(fa);
      const auto flags = lcs::degeneracy_scan(m, grid, t0, p, cfg, threads);
      write_flags_csv(flags, out);
      std::printf("kind=jumps flags=%zu out=%s\n", flags.size(), out.c_str());
      return 0;
    }
    if (c_ridges->parsed()) {
      const auto g = lcs::read_grid(in_path);
      int discarded = 0;
      const auto curves = lcs::extract_ridges(g, g.default_tol_grad(), &discarded);
      write_ridge_csv(curves, out);
      std::printf("kind=ridges curves=%zu discarded_chains=%d out=%s\n", curves.size(),
                  discarded, out.c_str());
      return 0;
    }
    if (c_cont->parsed()) {
      const auto m = build_flow(fa);
      const auto field =
          lcs::compute_field(lcs::FieldKind::FSLE, m, grid, t0, horizon, p, cfg, threads);
      auto curves = lcs::extract_ridges(field, field.default_tol_grad());
      if (curves.empty()) {
        if (auto crest = lcs::crest_curve(field)) curves.push_back(std::move(*crest));
      }
      if (curves.empty()) throw std::runtime_error("no FSLE ridge found on the grid");
      const auto longest = std::max_element(
          curves.begin(), curves.end(), [](const auto& a, const auto& b) {
            return lcs::detail::polyline_length(a.points) <
                   lcs::detail::polyline_length(b.points);
          });
      lcs::ContinuationConfig cc;
      cc.t0 = t0;
      cc.threads = threads;
      const auto rep = lcs::continue_fsle_ridge(m, p, *longest, rho, cc, cfg);
      if (!out.empty()) write_ridge_csv({*longest}, out);
      std::printf(
          "kind=continue tau_bar=%.17g epsilon=%.17g rho=%.17g matched=%d "
          "hausdorff_c0=%.17g c1_angle=%.17g degenerate_neighborhood=%d "
          "undefined_points=%d\n",
          rep.tau_bar, rep.epsilon, rep.rho, rep.matched ? 1 : 0, rep.hausdorff_c0,
          rep.c1_angle, rep.degenerate_neighborhood ? 1 : 0, rep.undefined_points);
      return 0;
    }
    if (c_sens->parsed()) {
      const auto m = build_flow(fa);
      lcs::IntegratorConfig coarse = cfg, fine = cfg;
      coarse.dt = dt_coarse;
      fine.dt = dt_fine;
      lcs::SeparationParams p_step = p, p_bis = p;
      p_step.event_mode = lcs::EventMode::StepResolution;
      p_bis.event_mode = lcs::EventMode::Bisection;
      const auto tau_cs = lcs::compute_field(lcs::FieldKind::TauFinite, m, grid, t0,
                                             horizon, p_step, coarse, threads);
      const auto tau_fb = lcs::compute_field(lcs::FieldKind::TauFinite, m, grid, t0,
                                             horizon, p_bis, fine, threads);
      lcs::ScalarGrid delta(grid);
      double max_delta = 0.0;
      for (std::size_t k = 0; k < delta.values.size(); ++k) {
        const double a = tau_cs.values[k], b = tau_fb.values[k];
        if (!lcs::ScalarGrid::missing(a) && !lcs::ScalarGrid::missing(b)) {
          delta.values[k] = std::abs(a - b);
          max_delta = std::max(max_delta, delta.values[k]);
        }
      }
      lcs::write_grid(delta, out);
      std::size_t n_flags = 0;
      if (!flags_out.empty()) {
        const auto flags = lcs::degeneracy_scan(m, grid, t0, p_bis, fine, threads);
        write_flags_csv(flags, flags_out);
        n_flags = flags.size();
      }
      std::printf("kind=sensitivity max_delta_tau=%.17g flags=%zu out=%s\n", max_delta,
                  n_flags, out.c_str());
      return 0;
    }
    return 2;
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
