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

// Drives the vsim binary as a subprocess.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "json.hpp"
#include "test_util.h"
#include "vsim/color.h"
#include "vsim/io.h"
#include "vsim/pipeline.h"
#include "vsim/profile.h"

namespace fs = std::filesystem;
using Json = nlohmann::json;
using namespace vsim;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "vsim-cli-XXXXXX").string();
    path_ = mkdtemp(tmpl.data());
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'') {
      q += "'\\''";
    } else {
      q += c;
    }
  }
  return q + "'";
}

Run vsim_cli(const std::string& args) {
  TempDir tmp;
  const std::string cmd = quote(VSIM_BIN) + " " + args + " >" + quote((tmp / "out").string()) +
                          " 2>" + quote((tmp / "err").string());
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(tmp / "out");
  r.err = slurp(tmp / "err");
  return r;
}

std::array<double, 3> mean_linear(const Frame& f, int x0, int y0, int x1, int y1) {
  std::array<double, 3> m{};
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      for (int c = 0; c < 3; ++c) m[c] += srgb_decode(f.row(y)[x * 3 + c]);
    }
  }
  for (double& v : m) v /= double(x1 - x0) * (y1 - y0);
  return m;
}

double chebyshev(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])});
}

std::string identity_profile_path() {
  return testing::fixture("profiles/identity.vsim.json").string();
}

}  // namespace

TEST_CASE("simulate: identity profile keeps pixels; timing on stderr") {
  TempDir tmp;
  const Frame f = testing::random_frame(50, 40, 3);
  write_image(tmp / "in.png", f);
  const Run r = vsim_cli("simulate -i " + quote((tmp / "in.png").string()) + " -o " +
                         quote((tmp / "out.png").string()) + " --profile " +
                         quote(identity_profile_path()));
  REQUIRE(r.code == 0);
  CHECK(read_image(tmp / "out.png") == f);
  const Json timing = Json::parse(r.err);
  CHECK(timing["width"] == 50);
  CHECK(timing.contains("total_us"));
  CHECK(r.out.empty());
}

TEST_CASE("simulate: stage 2 collapses the blue/yellow card") {
  TempDir tmp;
  const auto card = testing::fixture("cards/blue_yellow.png");
  const Run r = vsim_cli("simulate -i " + quote(card.string()) + " -o " +
                         quote((tmp / "out.png").string()) + " --stage 2");
  REQUIRE(r.code == 0);
  const Frame in = read_image(card);
  const Frame out = read_image(tmp / "out.png");
  const double before =
      chebyshev(mean_linear(in, 40, 40, 96, 88), mean_linear(in, 160, 40, 216, 88));
  const double after =
      chebyshev(mean_linear(out, 40, 40, 96, 88), mean_linear(out, 160, 40, 216, 88));
  CHECK(after < before);
}

TEST_CASE("simulate: usage, io and profile errors") {
  TempDir tmp;
  write_image(tmp / "in.png", testing::random_frame(8, 8, 1));
  const std::string io = "-i " + quote((tmp / "in.png").string()) + " -o " +
                         quote((tmp / "o.png").string());

  Run r = vsim_cli("simulate " + io + " --stage 9");
  CHECK(r.code == 2);
  CHECK(r.err.find("0..4") != std::string::npos);

  r = vsim_cli("simulate " + io + " --stage 1 --profile " + quote(identity_profile_path()));
  CHECK(r.code == 2);
  r = vsim_cli("simulate -o x.png");
  CHECK(r.code == 2);
  r = vsim_cli("frobnicate");
  CHECK(r.code == 2);
  r = vsim_cli("simulate " + io + " --fixation 0.5");
  CHECK(r.code == 2);

  r = vsim_cli("simulate -i " + quote((tmp / "missing.png").string()) + " -o " +
               quote((tmp / "o.png").string()) + " --stage 0");
  CHECK(r.code == 3);
  std::ofstream(tmp / "junk.png") << "not an image";
  r = vsim_cli("simulate -i " + quote((tmp / "junk.png").string()) + " -o " +
               quote((tmp / "o.png").string()) + " --stage 0");
  CHECK(r.code == 3);

  std::ofstream(tmp / "bad.vsim.json") << R"({"cvd": {"severity": 1.5}})";
  r = vsim_cli("simulate " + io + " --profile " + quote((tmp / "bad.vsim.json").string()));
  CHECK(r.code == 4);
  CHECK(r.err.find("cvd.severity") != std::string::npos);
  r = vsim_cli("simulate " + io + " --stage 0 --fov 200");
  CHECK(r.code == 4);
  CHECK(r.err.find("field.fov_h") != std::string::npos);
  CHECK(!fs::exists(tmp / "o.png"));
}

TEST_CASE("simulate: seed, fixation and time overrides are applied") {
  TempDir tmp;
  write_image(tmp / "in.png", testing::random_frame(64, 64, 2));
  const std::string base =
      "simulate -i " + quote((tmp / "in.png").string()) + " --stage 4 --time 2 ";
  REQUIRE(vsim_cli(base + "-o " + quote((tmp / "a.png").string()) + " --seed 5").code == 0);
  REQUIRE(vsim_cli(base + "-o " + quote((tmp / "b.png").string()) + " --seed 5").code == 0);
  REQUIRE(vsim_cli(base + "-o " + quote((tmp / "c.png").string()) + " --seed 6").code == 0);
  REQUIRE(vsim_cli(base + "-o " + quote((tmp / "d.png").string()) +
                   " --seed 5 --fixation 0.2,0.3")
              .code == 0);
  CHECK(slurp(tmp / "a.png") == slurp(tmp / "b.png"));
  CHECK(slurp(tmp / "a.png") != slurp(tmp / "c.png"));
  CHECK(slurp(tmp / "a.png") != slurp(tmp / "d.png"));
}

TEST_CASE("batch: empty input directory") {
  TempDir tmp;
  fs::create_directories(tmp / "in");
  const Run r = vsim_cli("batch --input-dir " + quote((tmp / "in").string()) +
                         " --output-dir " + quote((tmp / "out").string()) + " --stage 0");
  CHECK(r.code == 0);
  CHECK(slurp(tmp / "out/timings.csv") == "path,width,height,total_us,over_budget\n");
}

TEST_CASE("batch: mirrors, is deterministic, counts failures") {
  TempDir tmp;
  fs::create_directories(tmp / "in/sub/deeper");
  write_image(tmp / "in/a.png", testing::random_frame(40, 30, 1));
  write_image(tmp / "in/sub/b.jpg", testing::random_frame(40, 30, 2));
  write_image(tmp / "in/sub/deeper/c.png", testing::random_frame(20, 60, 3));
  std::ofstream(tmp / "in/notes.txt") << "ignored";
  const std::string in = quote((tmp / "in").string());

  Run r = vsim_cli("batch --input-dir " + in + " --output-dir " +
                   quote((tmp / "out1").string()) + " --stage 4 --seed 11");
  REQUIRE(r.code == 0);
  r = vsim_cli("batch --input-dir " + in + " --output-dir " + quote((tmp / "out2").string()) +
               " --stage 4 --seed 11 --jobs 1");
  REQUIRE(r.code == 0);
  for (const char* rel : {"a.png", "sub/b.jpg", "sub/deeper/c.png"}) {
    INFO(rel);
    REQUIRE(fs::exists(tmp / "out1" / rel));
    CHECK(slurp(tmp / "out1" / rel) == slurp(tmp / "out2" / rel));
  }
  CHECK(!fs::exists(tmp / "out1/notes.txt"));
  std::istringstream csv(slurp(tmp / "out1/timings.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(csv, line)) lines.push_back(line);
  REQUIRE(lines.size() == 4);
  CHECK(lines[1].rfind("a.png,40,30,", 0) == 0);
  CHECK(lines[3].rfind("sub/deeper/c.png,20,60,", 0) == 0);

  std::ofstream(tmp / "in/sub/broken.png") << "garbage";
  r = vsim_cli("batch --input-dir " + in + " --output-dir " + quote((tmp / "out3").string()) +
               " --stage 1");
  CHECK(r.code == 5);
  CHECK(r.err.find("broken.png") != std::string::npos);
  CHECK(fs::exists(tmp / "out3/a.png"));
  CHECK(fs::exists(tmp / "out3/sub/b.jpg"));
  CHECK(fs::exists(tmp / "out3/sub/deeper/c.png"));
  CHECK(!fs::exists(tmp / "out3/sub/broken.png"));

  r = vsim_cli("batch --input-dir " + quote((tmp / "nope").string()) + " --output-dir " +
               quote((tmp / "out4").string()) + " --stage 1");
  CHECK(r.code == 3);
}

TEST_CASE("bench: json lines and size validation") {
  const Run r = vsim_cli("bench --size 64x48 --frames 2 --warmup 1 --stage 4");
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const Json j = Json::parse(line);
    CHECK(j["stage"] == 4);
    CHECK(j.contains("median_us"));
    CHECK(j.contains("p95_us"));
    CHECK(j.contains("median_within_budget"));
    ++n;
  }
  CHECK(n == 1);
  CHECK(vsim_cli("bench --size 64by48").code == 2);
  CHECK(vsim_cli("bench --size 0x48").code == 2);
  CHECK(vsim_cli("bench --size 64x48 --frames 0").code == 2);
  CHECK(vsim_cli("bench --size 64x48 --stage 7").code == 2);
}

TEST_CASE("profiles subcommands") {
  Run r = vsim_cli("profiles list");
  CHECK(r.code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 5);
  r = vsim_cli("profiles show 3");
  CHECK(r.code == 0);
  CHECK(load_profile(r.out) == preset(3));
  TempDir tmp;
  r = vsim_cli("profiles export 4 " + quote((tmp / "p.vsim.json").string()));
  CHECK(r.code == 0);
  CHECK(load_profile(slurp(tmp / "p.vsim.json")) == preset(4));
  r = vsim_cli("profiles show 9");
  CHECK(r.code == 2);
  CHECK(r.err.find("0..4") != std::string::npos);
}

TEST_CASE("serve: listens, answers, stops on SIGTERM") {
  TempDir tmp;
  const fs::path log = tmp / "serve.log";
  const pid_t pid = fork();
  REQUIRE(pid >= 0);
  if (pid == 0) {
    const std::string l = log.string();
    if (!freopen(l.c_str(), "w", stderr)) _exit(126);
    execl(VSIM_BIN, VSIM_BIN, "serve", "--port", "0", "--workers", "1",
          static_cast<char*>(nullptr));
    _exit(127);
  }
  int port = 0;
  for (int i = 0; i < 100 && port == 0; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    std::istringstream in(slurp(log));
    std::string line;
    while (std::getline(in, line)) {
      const Json j = Json::parse(line, nullptr, false);
      if (!j.is_discarded() && j.value("event", "") == "listening") port = j["port"];
    }
  }
  REQUIRE(port > 0);

  const int fd = socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  REQUIRE(connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  const std::string req = "GET /healthz HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n";
  REQUIRE(write(fd, req.data(), req.size()) == static_cast<ssize_t>(req.size()));
  std::string resp;
  char buf[4096];
  for (ssize_t n; (n = read(fd, buf, sizeof buf)) > 0;) resp.append(buf, n);
  close(fd);
  CHECK(resp.rfind("HTTP/1.1 200", 0) == 0);
  CHECK(resp.find("\"status\":\"ok\"") != std::string::npos);

  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
  CHECK(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 0);
}

TEST_CASE("serve: bind failure is an io error naming the address") {
  const int fd = socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  REQUIRE(bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  REQUIRE(listen(fd, 1) == 0);
  socklen_t len = sizeof addr;
  getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  const int port = ntohs(addr.sin_port);
  const Run r = vsim_cli("serve --port " + std::to_string(port));
  close(fd);
  CHECK(r.code == 3);
  CHECK(r.err.find("127.0.0.1:" + std::to_string(port)) != std::string::npos);
}
