#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <unistd.h>

#include <CLI11.hpp>

#include "d2dsim/d2dsim.h"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::optional<int> trials;
};

struct Handle {
  d2d_config* cfg = nullptr;
  ~Handle() { d2d_config_free(cfg); }
};

struct Text {
  char* s = nullptr;
  ~Text() { d2d_string_free(s); }
};

int report(int status)
{
  if (status != D2D_OK)
    std::cerr << "d2dsim: " << d2d_last_error() << "\n";
  return status;
}

/// Writes through a temporary sibling so a failed run leaves nothing behind.
bool write_atomic(const fs::path& path, const std::string& content)
{
  const fs::path tmp = path.string() + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      return false;
    out << content;
    if (!out.flush()) {
      std::error_code ec;
      fs::remove(tmp, ec);
      return false;
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    return false;
  }
  return true;
}

fs::path manifest_path(const fs::path& out)
{
  return out.string() + ".manifest.json";
}

int load(const Options& o, Handle& h)
{
  if (int st = d2d_config_load_file(o.config.c_str(), 1, &h.cfg); st != D2D_OK)
    return report(st);
  if (o.seed) {
    const std::string v = std::to_string(*o.seed);
    if (int st = d2d_config_set(h.cfg, "seed", "master", v.c_str()); st != D2D_OK)
      return report(st);
  }
  if (o.trials) {
    const std::string v = std::to_string(*o.trials);
    if (int st = d2d_config_set(h.cfg, "seed", "trials", v.c_str()); st != D2D_OK)
      return report(st);
    if (int st = d2d_config_set(h.cfg, "sweep", "trials_per_point", "0"); st != D2D_OK)
      return report(st);
  }
  return report(d2d_config_validate(h.cfg));
}

/// Output file plus its manifest; both or neither.
int emit(const Options& o, const Handle& h, const char* command, const std::string& content)
{
  Text manifest;
  if (int st = d2d_manifest(h.cfg, command, o.workers, &manifest.s); st != D2D_OK)
    return report(st);
  const fs::path out(o.out);
  if (!write_atomic(out, content)) {
    std::cerr << "d2dsim: cannot write '" << o.out << "'\n";
    return D2D_ERR_RUNTIME;
  }
  if (!write_atomic(manifest_path(out), manifest.s)) {
    std::error_code ec;
    fs::remove(out, ec);
    std::cerr << "d2dsim: cannot write '" << manifest_path(out).string() << "'\n";
    return D2D_ERR_RUNTIME;
  }
  return D2D_OK;
}

void progress(long done, long total, void*)
{
  if (done == total || done % 50 == 0)
    std::fprintf(stderr, "\r  %ld/%ld trials", done, total);
  if (done == total)
    std::fputc('\n', stderr);
}

int run_generate_map(const Options& o)
{
  Handle h;
  if (int st = load(o, h); st != D2D_OK)
    return st;
  if (o.seed) {
    const std::string v = std::to_string(*o.seed);
    if (int st = d2d_config_set(h.cfg, "map", "seed", v.c_str()); st != D2D_OK)
      return report(st);
  }
  d2d_map* map = nullptr;
  if (int st = d2d_map_build(h.cfg, &map); st != D2D_OK)
    return report(st);
  Text text;
  const int st = d2d_map_serialize(map, &text.s);
  d2d_map_free(map);
  if (st != D2D_OK)
    return report(st);
  return emit(o, h, "generate-map", text.s);
}

int run_simulate(const Options& o)
{
  Handle h;
  if (int st = load(o, h); st != D2D_OK)
    return st;
  Text csv;
  if (int st = d2d_simulate(h.cfg, o.workers, &csv.s); st != D2D_OK)
    return report(st);
  return emit(o, h, "simulate", csv.s);
}

int run_sweep(const Options& o)
{
  Handle h;
  if (int st = load(o, h); st != D2D_OK)
    return st;
  Text csv;
  const d2d_progress_fn cb = isatty(STDERR_FILENO) ? progress : nullptr;
  if (int st = d2d_sweep(h.cfg, o.workers, cb, nullptr, &csv.s); st != D2D_OK)
    return report(st);
  return emit(o, h, "sweep", csv.s);
}

int run_analyze(const Options& o)
{
  Handle h;
  if (int st = load(o, h); st != D2D_OK)
    return st;
  Text csv;
  if (int st = d2d_analyze(h.cfg, o.trials.value_or(100000), &csv.s); st != D2D_OK)
    return report(st);
  return emit(o, h, "analyze", csv.s);
}

int run_validate(const Options& o)
{
  Handle h;
  if (!o.config.empty()) {
    if (int st = load(o, h); st != D2D_OK)
      return st;
  } else if (int st = d2d_config_parse(nullptr, 1, &h.cfg); st != D2D_OK) {
    return report(st);
  }
  Text text;
  const int st = d2d_validate(o.seed.value_or(1), o.trials.value_or(100000), &text.s);
  if (st != D2D_OK && st != D2D_ERR_TOLERANCE)
    return report(st);
  if (o.out.empty()) {
    std::cout << text.s;
  } else if (int wst = emit(o, h, "validate", text.s); wst != D2D_OK) {
    return wst;
  }
  return report(st);
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Monte-Carlo simulator for D2D multi-hop relaying in a cellular network"};
  app.set_version_flag("--version", std::string(d2d_version()));
  app.require_subcommand(1);

  Options o;
  const auto add_common = [&](CLI::App* sub, bool config_required, bool out_required) {
    auto* c = sub->add_option("--config", o.config, "Scenario config file")->check(CLI::ExistingFile);
    if (config_required)
      c->required();
    auto* out = sub->add_option("--out", o.out, "Output file (a .manifest.json is written next to it)");
    if (out_required)
      out->required();
    sub->add_option("--seed", o.seed, "Master seed override");
    sub->add_option("--trials", o.trials, "Trials override")->check(CLI::PositiveNumber);
    sub->add_option("--workers", o.workers, "Worker threads")->check(CLI::Range(1, 1024));
  };

  auto* gen = app.add_subcommand("generate-map", "Write the scenario's map as JSON");
  add_common(gen, true, true);
  auto* sim = app.add_subcommand("simulate", "Per-trial results for the configured strategy and band");
  add_common(sim, true, true);
  auto* swp = app.add_subcommand("sweep", "Run the configured sweep and write the results CSV");
  add_common(swp, true, true);
  auto* ana = app.add_subcommand("analyze", "Closed-form vs Monte-Carlo CC link success table");
  add_common(ana, true, true);
  auto* val = app.add_subcommand("validate", "Run the oracle suites; exit 4 on a tolerance breach");
  add_common(val, false, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return D2D_ERR_USAGE;
  }

  if (gen->parsed())
    return run_generate_map(o);
  if (sim->parsed())
    return run_simulate(o);
  if (swp->parsed())
    return run_sweep(o);
  if (ana->parsed())
    return run_analyze(o);
  return run_validate(o);
}
