// Copyright 2026 The vsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// vsim: simulate, batch, bench, serve, profiles.

#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "vsim/errors.h"
#include "vsim/filters.h"
#include "vsim/io.h"
#include "vsim/pipeline.h"
#include "vsim/profile.h"
#include "vsim/service.h"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

enum Exit : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kIo = 3,
  kProfile = 4,
  kPartial = 5,
};

struct UsageError : vsim::Error {
  using vsim::Error::Error;
};

bool use_color() { return std::getenv("NO_COLOR") == nullptr && isatty(STDERR_FILENO); }

void log_error(const std::string& message) {
  if (use_color()) {
    std::cerr << "\033[31merror:\033[0m " << message << "\n";
  } else {
    std::cerr << "error: " << message << "\n";
  }
}

// Flags shared by simulate and batch.
struct ProfileFlags {
  std::optional<int> stage;
  std::string profile_path;
  std::string fixation;
  std::optional<double> fov;
  std::optional<std::uint64_t> seed;
  bool lenient = false;

  void add_to(CLI::App* cmd) {
    auto* s = cmd->add_option("--stage", stage, "Preset stage 0..4");
    auto* p = cmd->add_option("--profile", profile_path, "Profile file (.vsim.json)");
    s->excludes(p);
    cmd->add_option("--fixation", fixation, "Fixation point x,y in [0,1]");
    cmd->add_option("--fov", fov, "Horizontal field of view in degrees");
    cmd->add_option("--seed", seed, "Seed for floaters and patches");
    cmd->add_flag("--lenient", lenient, "Warn about unknown profile fields instead of failing");
  }

  vsim::SimulationProfile resolve() const {
    vsim::SimulationProfile p;
    if (!profile_path.empty()) {
      const auto bytes = vsim::read_file(profile_path);
      const std::string text(bytes.begin(), bytes.end());
      std::vector<std::string> warnings;
      p = vsim::load_profile(text, lenient ? vsim::ParseMode::kLenient : vsim::ParseMode::kStrict,
                             &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << profile_path << ": " << w << "\n";
    } else {
      const int s = stage.value_or(0);
      if (s < 0 || s >= vsim::kStageCount) {
        throw UsageError("--stage " + std::to_string(s) + " is out of range; valid stages are 0..4");
      }
      p = vsim::preset(s);
    }
    if (!fixation.empty()) {
      const auto comma = fixation.find(',');
      try {
        if (comma == std::string::npos) throw std::invalid_argument("no comma");
        std::size_t used = 0;
        p.field.fixation_x = std::stod(fixation.substr(0, comma), &used);
        if (used != comma) throw std::invalid_argument("trailing");
        const std::string ys = fixation.substr(comma + 1);
        p.field.fixation_y = std::stod(ys, &used);
        if (used != ys.size()) throw std::invalid_argument("trailing");
      } catch (const std::logic_error&) {
        throw UsageError("--fixation expects x,y (e.g. 0.5,0.5), got '" + fixation + "'");
      }
    }
    if (fov) p.field.fov_h = *fov;
    if (seed) {
      p.floaters.seed = *seed;
      p.patches.seed = *seed;
    }
    p.validate();
    return p;
  }
};

// Maps library exceptions onto exit codes.
template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    log_error(e.what());
    return kUsage;
  } catch (const vsim::ValidationError& e) {
    log_error(std::string("invalid profile: ") + e.what());
    return kProfile;
  } catch (const vsim::ParseError& e) {
    log_error(e.what());
    return kProfile;
  } catch (const vsim::IoError& e) {
    log_error(e.what());
    return kIo;
  } catch (const std::exception& e) {
    log_error(e.what());
    return kInternal;
  }
}

// Reads an image; undecodable files are I/O errors here, not profile errors.
vsim::Frame read_input(const fs::path& path) {
  try {
    return vsim::read_image(path);
  } catch (const vsim::ParseError& e) {
    throw vsim::IoError(e.what());
  }
}

// simulate ------------------------------------------------------------------

struct SimulateFlags {
  std::string input;
  std::string output;
  double time = 0.0;
  std::optional<double> budget;
  ProfileFlags profile;
};

int run_simulate(const SimulateFlags& f) {
  return guarded([&] {
    const vsim::SimulationProfile p = f.profile.resolve();
    vsim::codec_for_path(f.output);  // reject unsupported extensions before any work
    const vsim::Frame in = read_input(f.input);
    const auto result = vsim::process_frame(in, p, f.time, f.budget.value_or(vsim::budget_from_env()));
    vsim::write_image(f.output, result.frame);
    std::cerr << result.timing.to_json() << "\n";
    return kOk;
  });
}

// batch ---------------------------------------------------------------------

struct BatchFlags {
  std::string input_dir;
  std::string output_dir;
  std::string csv;
  int jobs = 0;
  double time = 0.0;
  std::optional<double> budget;
  ProfileFlags profile;
};

bool is_image_path(const fs::path& p) {
  try {
    vsim::codec_for_path(p);
    return true;
  } catch (const vsim::IoError&) {
    return false;
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

int run_batch(const BatchFlags& f) {
  return guarded([&] {
    const vsim::SimulationProfile p = f.profile.resolve();
    const double budget = f.budget.value_or(vsim::budget_from_env());
    const fs::path in_root(f.input_dir);
    const fs::path out_root(f.output_dir);
    if (!fs::is_directory(in_root)) throw vsim::IoError("input directory " + f.input_dir + " does not exist");
    std::error_code ec;
    fs::create_directories(out_root, ec);
    if (ec) throw vsim::IoError("cannot create " + f.output_dir + ": " + ec.message());

    // An output directory nested in the input is not walked.
    const fs::path out_canon = fs::weakly_canonical(out_root);
    std::vector<fs::path> files;
    for (auto it = fs::recursive_directory_iterator(in_root);
         it != fs::recursive_directory_iterator(); ++it) {
      if (it->is_directory() && fs::weakly_canonical(it->path()) == out_canon) {
        it.disable_recursion_pending();
        continue;
      }
      if (it->is_regular_file() && is_image_path(it->path())) {
        files.push_back(fs::relative(it->path(), in_root));
      }
    }
    std::sort(files.begin(), files.end());

    struct Row {
      std::string path;
      int width = 0, height = 0;
      double total_us = 0;
      bool over_budget = false;
      bool ok = false;
    };
    std::vector<Row> rows(files.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mu;
    auto worker = [&] {
      for (std::size_t i = next++; i < files.size(); i = next++) {
        Row& row = rows[i];
        row.path = files[i].generic_string();
        try {
          const vsim::Frame in = read_input(in_root / files[i]);
          const auto result = vsim::process_frame(in, p, f.time, budget);
          const fs::path out = out_root / files[i];
          fs::create_directories(out.parent_path());
          vsim::write_image(out, result.frame);
          row.width = in.width();
          row.height = in.height();
          row.total_us = result.timing.total_us;
          row.over_budget = result.timing.over_budget;
          row.ok = true;
        } catch (const std::exception& e) {
          std::lock_guard lock(log_mu);
          Json line;
          line["event"] = "error";
          line["path"] = (in_root / files[i]).string();
          line["message"] = e.what();
          std::cerr << line.dump() << "\n";
        }
      }
    };
    const int jobs = f.jobs > 0 ? f.jobs : std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> threads;
    for (int j = 1; j < jobs && std::size_t(j) < files.size(); ++j) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();

    const fs::path csv_path = f.csv.empty() ? out_root / "timings.csv" : fs::path(f.csv);
    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv) throw vsim::IoError("cannot write " + csv_path.string());
    csv << "path,width,height,total_us,over_budget\n";
    std::size_t failed = 0;
    for (const Row& r : rows) {
      if (!r.ok) {
        ++failed;
        continue;
      }
      char us[32];
      std::snprintf(us, sizeof us, "%.1f", r.total_us);
      csv << csv_field(r.path) << ',' << r.width << ',' << r.height << ',' << us << ','
          << (r.over_budget ? "true" : "false") << '\n';
    }
    if (!csv) throw vsim::IoError("error writing " + csv_path.string());
    Json summary;
    summary["event"] = "batch";
    summary["processed"] = files.size() - failed;
    summary["failed"] = failed;
    summary["csv"] = csv_path.string();
    std::cerr << summary.dump() << "\n";
    return failed ? kPartial : kOk;
  });
}

// bench ---------------------------------------------------------------------

struct BenchFlags {
  std::string size = "1280x720";
  int frames = 30;
  int warmup = 10;
  std::string stage = "all";
  std::optional<double> budget;
};

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const std::size_t i = static_cast<std::size_t>(std::ceil(q * double(v.size()))) - 1;
  return v[std::min(i, v.size() - 1)];
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int run_bench(const BenchFlags& f) {
  return guarded([&] {
    int w = 0, h = 0;
    {
      const auto x = f.size.find('x');
      std::size_t a = 0, b = 0;
      try {
        if (x == std::string::npos) throw std::invalid_argument("no x");
        w = std::stoi(f.size.substr(0, x), &a);
        h = std::stoi(f.size.substr(x + 1), &b);
      } catch (const std::logic_error&) {
        throw UsageError("--size expects WxH (e.g. 1280x720), got '" + f.size + "'");
      }
      if (a != x || b != f.size.size() - x - 1 || w < 1 || h < 1 || w > 16384 || h > 16384) {
        throw UsageError("--size expects WxH with 1..16384 pixels per side, got '" + f.size + "'");
      }
    }
    if (f.frames < 1) throw UsageError("--frames must be >= 1");
    if (f.warmup < 0) throw UsageError("--warmup must be >= 0");
    std::vector<int> stages;
    if (f.stage == "all") {
      for (int s = 0; s < vsim::kStageCount; ++s) stages.push_back(s);
    } else {
      int s = -1;
      try {
        std::size_t used = 0;
        s = std::stoi(f.stage, &used);
        if (used != f.stage.size()) s = -1;
      } catch (const std::logic_error&) {
      }
      if (s < 0 || s >= vsim::kStageCount) {
        throw UsageError("--stage expects 'all' or 0..4, got '" + f.stage + "'");
      }
      stages.push_back(s);
    }
    const double budget = f.budget.value_or(vsim::budget_from_env());

    vsim::Frame frame(w, h);
    vsim::SplitMix64 rng(20240601);
    for (auto& v : frame.pixels()) v = static_cast<std::uint8_t>(rng.next() >> 56);

    for (int stage : stages) {
      const vsim::SimulationProfile p = vsim::preset(stage);
      for (int i = 0; i < f.warmup; ++i) vsim::process_frame(frame, p, 0.0, budget);
      std::vector<double> totals;
      std::vector<std::string> names;
      std::vector<std::vector<double>> per_filter;
      for (int i = 0; i < f.frames; ++i) {
        const auto r = vsim::process_frame(frame, p, i / 30.0, budget);
        totals.push_back(r.timing.total_us);
        if (names.empty()) {
          for (const auto& t : r.timing.filters) names.push_back(t.name);
          per_filter.resize(names.size());
        }
        for (std::size_t k = 0; k < r.timing.filters.size(); ++k) {
          per_filter[k].push_back(r.timing.filters[k].micros);
        }
      }
      Json line;
      line["stage"] = stage;
      line["width"] = w;
      line["height"] = h;
      line["warmup"] = f.warmup;
      line["frames"] = f.frames;
      line["median_us"] = median(totals);
      line["p95_us"] = percentile(totals, 0.95);
      line["budget_us"] = budget;
      line["median_within_budget"] = median(totals) <= budget;
      line["filters"] = Json::array();
      for (std::size_t k = 0; k < names.size(); ++k) {
        line["filters"].push_back({{"name", names[k]},
                                   {"median_us", median(per_filter[k])},
                                   {"p95_us", percentile(per_filter[k], 0.95)}});
      }
      std::cout << line.dump() << std::endl;
      if (use_color()) {
        const bool ok = median(totals) <= budget;
        std::fprintf(stderr, "stage %d  median %8.0f us  p95 %8.0f us  %s%s\033[0m\n", stage,
                     median(totals), percentile(totals, 0.95), ok ? "\033[32m" : "\033[31m",
                     ok ? "within budget" : "over budget");
      }
    }
    return kOk;
  });
}

// serve ---------------------------------------------------------------------

struct ServeFlags {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;
  std::size_t max_frame_bytes = vsim::kDefaultMaxFrameBytes;
  std::size_t max_pending = 2;
  int workers = 0;
  std::optional<double> budget;
};

int run_serve(ServeFlags f) {
  return guarded([&] {
    // Signals go to a dedicated thread so the server stops cleanly.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    vsim::ServiceConfig config;
    config.address = f.address;
    config.port = f.port;
    config.max_frame_bytes = f.max_frame_bytes;
    config.max_pending_frames = std::max<std::size_t>(1, f.max_pending);
    config.worker_threads = f.workers;
    config.budget_us = f.budget.value_or(vsim::budget_from_env());
    vsim::Server server(config);

    Json line;
    line["event"] = "listening";
    line["address"] = config.address;
    line["port"] = server.port();
    line["version"] = vsim::kVersion;
    std::cerr << line.dump() << std::endl;

    std::thread waiter([&] {
      int sig = 0;
      sigwait(&signals, &sig);
      server.stop();
    });
    server.run();
    // run() only returns after stop(), which the waiter issued.
    waiter.join();
    return kOk;
  });
}

// profiles ------------------------------------------------------------------

int parse_stage_arg(const std::string& s) {
  std::size_t used = 0;
  int stage = -1;
  try {
    stage = std::stoi(s, &used);
  } catch (const std::logic_error&) {
  }
  if (used != s.size() || stage < 0 || stage >= vsim::kStageCount) {
    throw UsageError("unknown preset '" + s + "'; presets are 0..4");
  }
  return stage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diabetic retinopathy vision simulator"};
  app.set_version_flag("--version", vsim::kVersion);
  app.require_subcommand(1);

  SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate one image");
  simulate->add_option("--input,-i", sim.input, "Input PNG or JPEG")->required();
  simulate->add_option("--output,-o", sim.output, "Output path (.png, .jpg, .jpeg)")->required();
  simulate->add_option("--time", sim.time, "Seconds since onset; drives floater drift");
  simulate->add_option("--budget", sim.budget, "Frame budget in microseconds");
  sim.profile.add_to(simulate);

  BatchFlags batch;
  auto* batch_cmd = app.add_subcommand("batch", "Simulate every image under a directory");
  batch_cmd->add_option("--input-dir", batch.input_dir, "Directory of PNG/JPEG files")->required();
  batch_cmd->add_option("--output-dir", batch.output_dir, "Mirrored output directory")->required();
  batch_cmd->add_option("--csv", batch.csv, "Timing summary (default <output-dir>/timings.csv)");
  batch_cmd->add_option("--jobs,-j", batch.jobs, "Parallel files (default: logical cores)");
  batch_cmd->add_option("--time", batch.time, "Seconds since onset; drives floater drift");
  batch_cmd->add_option("--budget", batch.budget, "Frame budget in microseconds");
  batch.profile.add_to(batch_cmd);

  BenchFlags bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time the pipeline on a synthetic noise frame");
  bench_cmd->add_option("--size", bench.size, "Frame size WxH")->capture_default_str();
  bench_cmd->add_option("--frames", bench.frames, "Timed frames per stage")->capture_default_str();
  bench_cmd->add_option("--warmup", bench.warmup, "Untimed frames per stage")->capture_default_str();
  bench_cmd->add_option("--stage", bench.stage, "'all' or 0..4")->capture_default_str();
  bench_cmd->add_option("--budget", bench.budget, "Frame budget in microseconds");

  ServeFlags serve;
  if (const char* a = std::getenv("VSIM_ADDRESS")) serve.address = a;
  if (const char* p = std::getenv("VSIM_PORT")) {
    const int port = std::atoi(p);
    if (port > 0 && port < 65536) serve.port = static_cast<unsigned short>(port);
  }
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP/WebSocket service");
  serve_cmd->add_option("--address", serve.address, "Bind address (env VSIM_ADDRESS)")
      ->capture_default_str();
  serve_cmd->add_option("--port", serve.port, "Port, 0 for any (env VSIM_PORT)")
      ->capture_default_str();
  serve_cmd->add_option("--max-frame-bytes", serve.max_frame_bytes, "Largest accepted frame")
      ->capture_default_str();
  serve_cmd->add_option("--max-pending", serve.max_pending, "Queued frames per session")
      ->capture_default_str();
  serve_cmd->add_option("--workers", serve.workers, "Processing threads (default: cores)");
  serve_cmd->add_option("--budget", serve.budget, "Frame budget in microseconds");

  auto* profiles = app.add_subcommand("profiles", "List, show or export presets");
  profiles->require_subcommand(1);
  auto* list = profiles->add_subcommand("list", "One line per preset");
  std::string show_stage;
  auto* show = profiles->add_subcommand("show", "Print a preset profile");
  show->add_option("stage", show_stage, "0..4")->required();
  std::string export_stage, export_path;
  auto* exp = profiles->add_subcommand("export", "Write a preset profile to a file");
  exp->add_option("stage", export_stage, "0..4")->required();
  exp->add_option("path", export_path, "Destination (.vsim.json)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (simulate->parsed()) return run_simulate(sim);
  if (batch_cmd->parsed()) return run_batch(batch);
  if (bench_cmd->parsed()) return run_bench(bench);
  if (serve_cmd->parsed()) return run_serve(serve);
  if (list->parsed()) {
    for (int s = 0; s < vsim::kStageCount; ++s) {
      std::cout << "stage-" << s << "  " << vsim::preset_description(s) << "\n";
    }
    return kOk;
  }
  if (show->parsed()) {
    return guarded([&] {
      std::cout << vsim::save_profile(vsim::preset(parse_stage_arg(show_stage)));
      return kOk;
    });
  }
  if (exp->parsed()) {
    return guarded([&] {
      const std::string text = vsim::save_profile(vsim::preset(parse_stage_arg(export_stage)));
      vsim::write_file(export_path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                              text.size()));
      return kOk;
    });
  }
  return kUsage;
}
