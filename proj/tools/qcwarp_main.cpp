// qcwarp command-line front end.
//
// Exit codes: 0 ok, 2 bad input (arguments, magic, spec), 3 I/O,
// 4 numerically inadmissible, 5 fold. Errors go to stderr as
// "qcwarp: error[<category>]: <message>".

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "qcwarp/beltrami.hpp"
#include "qcwarp/distort.hpp"
#include "qcwarp/error.hpp"
#include "qcwarp/io.hpp"
#include "qcwarp/lbs.hpp"
#include "qcwarp/metrics.hpp"
#include "qcwarp/restore.hpp"
#include "qcwarp/warp.hpp"

namespace fs = std::filesystem;
using namespace qcwarp;

namespace {

enum Exit { kOk = 0, kInput = 2, kIo = 3, kNumeric = 4, kFold = 5 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return kIo;
    case ErrorKind::InadmissibleCoefficient:
    case ErrorKind::DegenerateMap:
    case ErrorKind::NumericalFailure: return kNumeric;
    case ErrorKind::Fold: return kFold;
    default: return kInput;
  }
}

bool g_quiet = false;

void info(const std::string& msg) {
  if (!g_quiet) std::cerr << "qcwarp: " << msg << "\n";
}

std::string read_text(const fs::path& path) {
  const auto bytes = io::read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_text(const fs::path& path, const std::string& text) {
  io::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory '" + dir.string() + "': " + ec.message());
}

unsigned worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QCWARP_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  fs::path image_in, spec_json, image_out, map_out;
  std::optional<std::uint64_t> seed;
  int bit_depth = 8;
};

int run_simulate(const SimulateArgs& a) {
  const auto image = io::read_image(a.image_in);
  const auto text = read_text(a.spec_json);
  const bool batch = text.find_first_not_of(" \t\r\n") != std::string::npos &&
                     text[text.find_first_not_of(" \t\r\n")] == '[';
  auto specs = parse_manifest(text);
  if (a.seed) {
    for (std::size_t i = 0; i < specs.size(); ++i) specs[i].seed = *a.seed + i;
  }
  if (!batch) {
    const auto pair = make_pair(image, specs.front());
    io::write_image(a.image_out, pair.distorted, a.bit_depth);
    io::write_map(a.map_out, pair.truth);
    info("wrote " + a.image_out.string() + " and " + a.map_out.string());
    return kOk;
  }

  // Manifest: outputs are directories holding pair_NNN.png / pair_NNN.qcm.
  ensure_dir(a.image_out);
  ensure_dir(a.map_out);
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::optional<Error> first_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        char stem[32];
        std::snprintf(stem, sizeof stem, "pair_%03zu", i);
        const auto pair = make_pair(image, specs[i]);
        io::write_image(a.image_out / (std::string(stem) + ".png"), pair.distorted, a.bit_depth);
        io::write_map(a.map_out / (std::string(stem) + ".qcm"), pair.truth);
      } catch (const Error& e) {
        std::lock_guard lock(err_mutex);
        if (!first_error) first_error = e;
      }
    }
  };
  std::vector<std::jthread> pool;
  const unsigned n = worker_count(specs.size());
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  pool.clear();
  if (first_error) throw *first_error;
  info("wrote " + std::to_string(specs.size()) + " pairs");
  return kOk;
}

int run_compute_mu(const fs::path& map_in, const fs::path& mu_out) {
  const auto map = io::read_map(map_in);
  const auto field = compute_beltrami(map);
  io::write_field(mu_out, field);
  info("sup |mu| = " + std::to_string(sup_norm(field)));
  return kOk;
}

int run_solve(const fs::path& mu_in, const fs::path& map_out) {
  const auto field = io::read_field(mu_in);
  const auto& mesh = field.mesh_ptr();
  const auto system = assemble(mesh, field, BoundaryCondition::identity_boundary(*mesh));
  const auto map = solve(system);
  io::write_map(map_out, map);
  info("residual " + std::to_string(residual_loss(system, map)));
  return kOk;
}

int run_warp(const fs::path& image_in, const fs::path& map_in, const fs::path& image_out,
             bool require_bijective, int bit_depth) {
  const auto image = io::read_image(image_in);
  const auto map = io::read_map(map_in);
  io::write_image(image_out, warp_image(image, map, require_bijective), bit_depth);
  return kOk;
}

struct RestoreArgs {
  fs::path distorted, reference, image_out;
  std::optional<fs::path> config, map_out, mu_out, trace_out;
  int bit_depth = 8;
};

int run_restore(const RestoreArgs& a) {
  const auto distorted = io::read_image(a.distorted);
  const auto reference = io::read_image(a.reference);
  const RestoreConfig cfg = a.config ? parse_restore_config(read_text(*a.config)) : RestoreConfig{};
  const auto result = restore_pair(distorted, reference, cfg);
  io::write_image(a.image_out, result.restored, a.bit_depth);
  if (a.map_out) io::write_map(*a.map_out, result.map);
  if (a.mu_out) io::write_field(*a.mu_out, result.field);
  if (a.trace_out) write_text(*a.trace_out, trace_csv(result.trace));
  info("restored with " + std::to_string(result.trace.size()) + " accepted steps, MSE " +
       std::to_string(mse(distorted, reference)) + " -> " + std::to_string(mse(result.restored, reference)));
  return kOk;
}

int run_evaluate(const fs::path& a, const fs::path& b, const std::optional<fs::path>& report_out) {
  const auto rep = evaluate(io::read_image(a), io::read_image(b));
  if (!report_out) {
    std::cout << to_json_string(rep) << "\n";
  } else if (report_out->extension() == ".csv") {
    write_text(*report_out, csv_header() + "\n" + to_csv_row(rep) + "\n");
  } else {
    write_text(*report_out, to_json_string(rep) + "\n");
  }
  return kOk;
}

// Deformed grid lines drawn black on white, every `step`-th vertex row and
// column plus the last ones.
RasterImage render_grid(const DeformationMap& map, int step, int scale) {
  const auto& mesh = map.mesh();
  RasterImage canvas(mesh.width_v() * scale, mesh.height_v() * scale, 1, 1.0);
  const auto pos = map.positions();
  auto plot = [&](double x, double y) {
    const int c = static_cast<int>(std::lround(x * scale + 0.5 * (scale - 1)));
    const int r = static_cast<int>(std::lround(y * scale + 0.5 * (scale - 1)));
    if (r >= 0 && r < canvas.height() && c >= 0 && c < canvas.width()) canvas.at(r, c) = 0.0;
  };
  auto segment = [&](Vec2 p, Vec2 q) {
    const double len = std::hypot(q.x - p.x, q.y - p.y) * scale;
    const int n = std::max(1, static_cast<int>(std::ceil(2.0 * len)));
    for (int k = 0; k <= n; ++k) {
      const double t = static_cast<double>(k) / n;
      plot(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y));
    }
  };
  auto on_line = [step](int i, int last) { return i % step == 0 || i == last; };
  for (int i = 0; i < mesh.height_v(); ++i) {
    if (!on_line(i, mesh.height_v() - 1)) continue;
    for (int j = 0; j + 1 < mesh.width_v(); ++j) {
      segment(pos[mesh.vertex_index(i, j)], pos[mesh.vertex_index(i, j + 1)]);
    }
  }
  for (int j = 0; j < mesh.width_v(); ++j) {
    if (!on_line(j, mesh.width_v() - 1)) continue;
    for (int i = 0; i + 1 < mesh.height_v(); ++i) {
      segment(pos[mesh.vertex_index(i, j)], pos[mesh.vertex_index(i + 1, j)]);
    }
  }
  return canvas;
}

int run_viz_grid(const fs::path& map_in, const fs::path& image_out, int step, int scale) {
  if (step < 1 || scale < 1) throw Error(ErrorKind::InvalidArgument, "--step and --scale must be >= 1");
  io::write_image(image_out, render_grid(io::read_map(map_in), step, scale));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qcwarp: quasiconformal image warping and restoration toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--quiet", g_quiet, "Suppress progress messages");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Distort an image with a parametric field (I o f + noise)");
  simulate->add_option("image_in", sim.image_in, "Clean input image")->required();
  simulate->add_option("spec_json", sim.spec_json, "Distortion spec (object) or manifest (array)")->required();
  simulate->add_option("image_out", sim.image_out, "Distorted image (directory for manifests)")->required();
  simulate->add_option("map_out", sim.map_out, "Ground-truth QCM1 map (directory for manifests)")->required();
  simulate->add_option("--seed", sim.seed, "Override the spec seed (manifest entry i gets seed + i)");
  simulate->add_option("--bit-depth", sim.bit_depth, "Output image bit depth")->check(CLI::IsMember({8, 16}));

  fs::path map_in, mu_out;
  auto* compute_mu = app.add_subcommand("compute-mu", "Beltrami coefficient of a QCM1 map");
  compute_mu->add_option("map_in", map_in)->required();
  compute_mu->add_option("mu_out", mu_out)->required();

  fs::path mu_in, map_out;
  auto* solve_cmd = app.add_subcommand("solve", "Reconstruct a map from a QCB1 field (identity boundary)");
  solve_cmd->add_option("mu_in", mu_in)->required();
  solve_cmd->add_option("map_out", map_out)->required();

  fs::path warp_image_in, warp_map_in, warp_out;
  bool require_bijective = false;
  int warp_depth = 8;
  auto* warp_cmd = app.add_subcommand("warp", "Backward-warp an image by a QCM1 map");
  warp_cmd->add_option("image_in", warp_image_in)->required();
  warp_cmd->add_option("map_in", warp_map_in)->required();
  warp_cmd->add_option("image_out", warp_out)->required();
  warp_cmd->add_flag("--require-bijective", require_bijective, "Fail with exit 5 on folded maps");
  warp_cmd->add_option("--bit-depth", warp_depth)->check(CLI::IsMember({8, 16}));

  RestoreArgs rest;
  std::optional<std::uint64_t> restore_seed;
  auto* restore_cmd = app.add_subcommand("restore", "Restore a distorted image toward a reference");
  restore_cmd->add_option("distorted_in", rest.distorted)->required();
  restore_cmd->add_option("reference_in", rest.reference)->required();
  restore_cmd->add_option("image_out", rest.image_out, "Restored image")->required();
  restore_cmd->add_option("--config", rest.config, "Restore configuration JSON");
  restore_cmd->add_option("--map-out", rest.map_out, "Recovered QCM1 map");
  restore_cmd->add_option("--mu-out", rest.mu_out, "Recovered QCB1 field");
  restore_cmd->add_option("--trace-out", rest.trace_out, "Loss trace CSV");
  restore_cmd->add_option("--seed", restore_seed, "Accepted for pipeline uniformity; restore is deterministic");
  restore_cmd->add_option("--bit-depth", rest.bit_depth)->check(CLI::IsMember({8, 16}));

  fs::path eval_a, eval_b;
  std::optional<fs::path> report_out;
  auto* eval_cmd = app.add_subcommand("evaluate", "MSE / PSNR / SSIM between two images");
  eval_cmd->add_option("a", eval_a)->required();
  eval_cmd->add_option("b", eval_b)->required();
  eval_cmd->add_option("report_out", report_out, "JSON report (.csv for a CSV row); stdout if omitted");

  fs::path viz_map, viz_out;
  int viz_step = 4;
  int viz_scale = 1;
  auto* viz = app.add_subcommand("viz-grid", "Draw the deformed mesh as grid lines");
  viz->add_option("map_in", viz_map)->required();
  viz->add_option("image_out", viz_out)->required();
  viz->add_option("--step", viz_step, "Draw every n-th grid line");
  viz->add_option("--scale", viz_scale, "Canvas pixels per vertex spacing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "qcwarp: error[invalid-argument]: " << e.what() << "\n";
    return kInput;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*compute_mu) return run_compute_mu(map_in, mu_out);
    if (*solve_cmd) return run_solve(mu_in, map_out);
    if (*warp_cmd) return run_warp(warp_image_in, warp_map_in, warp_out, require_bijective, warp_depth);
    if (*restore_cmd) return run_restore(rest);
    if (*eval_cmd) return run_evaluate(eval_a, eval_b, report_out);
    if (*viz) return run_viz_grid(viz_map, viz_out, viz_step, viz_scale);
  } catch (const Error& e) {
    std::cerr << "qcwarp: error[" << to_token(e.kind()) << "]: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "qcwarp: error[internal]: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
