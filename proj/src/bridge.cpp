#include "coarsepoint/bridge.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "coarsepoint/error.hpp"
#include "coarsepoint/records.hpp"

namespace coarsepoint::ingest {

namespace fs = std::filesystem;

namespace {

// Removes the exchange directory on scope exit.
class ScratchDir {
 public:
  explicit ScratchDir(const fs::path& base) {
    std::string templ = (base / "coarsepoint-bridge-XXXXXX").string();
    if (::mkdtemp(templ.data()) == nullptr) {
      throw BridgeError("cannot create scratch directory under '" + base.string() +
                        "': " + std::strerror(errno));
    }
    path_ = templ;
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct ExitStatus {
  bool timed_out = false;
  int code = 0;
  std::string stderr_text;
};

ExitStatus run_command(const std::string& command, const fs::path& input,
                       const fs::path& output, const fs::path& stderr_path,
                       std::chrono::seconds timeout) {
  const std::string script = command + " \"$@\"";
  const int err_fd = ::open(stderr_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
  if (err_fd < 0) throw BridgeError("cannot open stderr capture: " + std::string(std::strerror(errno)));

  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(err_fd);
    throw BridgeError("fork failed: " + std::string(std::strerror(errno)));
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(err_fd, STDERR_FILENO);
    ::close(err_fd);
    ::execl("/bin/sh", "sh", "-c", script.c_str(), "sh", input.c_str(), output.c_str(),
            static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(err_fd);

  ExitStatus status;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  int wstatus = 0;
  for (;;) {
    const pid_t r = ::waitpid(pid, &wstatus, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) throw BridgeError("waitpid failed: " + std::string(std::strerror(errno)));
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &wstatus, 0);
      status.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (!status.timed_out) {
    status.code = WIFEXITED(wstatus) ? WEXITSTATUS(wstatus) : 128 + WTERMSIG(wstatus);
  }
  status.stderr_text = slurp(stderr_path);
  return status;
}

}  // namespace

PredictionSet external_estimate(std::span<const Scene> scenes,
                                const AnnotationSet& annotations,
                                const refine::RefineConfig& cfg, const BridgeOptions& opts) {
  if (opts.command.empty()) throw BridgeError("no external estimator command given");

  RecordFile request;
  request.header = Header{};
  request.header->iteration = annotations.iteration;
  for (const auto& scene : scenes) {
    const auto it = annotations.points.find(scene.image_id);
    if (it == annotations.points.end()) {
      throw DataError("image '" + scene.image_id + "' has no annotations");
    }
    Record r;
    r.image_id = scene.image_id;
    r.width = scene.width;
    r.height = scene.height;
    std::vector<BBox> boxes;
    for (const auto& p : it->second) boxes.push_back(refine::point_to_pseudo_box(p, cfg.pseudo_box_size));
    r.objects = std::move(boxes);
    r.annotations = it->second;
    request.records.push_back(std::move(r));
  }

  const fs::path base = opts.work_dir.empty() ? fs::temp_directory_path() : opts.work_dir;
  ScratchDir scratch(base);
  const fs::path input = scratch.path() / "input.jsonl";
  const fs::path output = scratch.path() / "output.jsonl";
  write_record_file(input, request);

  const ExitStatus st = run_command(opts.command, input, output, scratch.path() / "stderr.txt",
                                    opts.timeout);
  if (st.timed_out) {
    throw BridgeError("external estimator timed out after " +
                      std::to_string(opts.timeout.count()) + " s");
  }
  if (st.code != 0) {
    throw BridgeError("external estimator exited with status " + std::to_string(st.code) +
                      (st.stderr_text.empty() ? std::string() : ": " + st.stderr_text));
  }
  if (!fs::exists(output)) throw BridgeError("external estimator wrote no output file");

  RecordFile reply;
  try {
    reply = read_record_file(output);
  } catch (const ParseError& e) {
    throw BridgeError(std::string("unparsable estimator output: ") + e.what());
  } catch (const SchemaError& e) {
    throw BridgeError(std::string("invalid estimator output: ") + e.what());
  }

  std::set<std::string> expected;
  for (const auto& s : scenes) expected.insert(s.image_id);
  PredictionSet out;
  for (const auto& r : reply.records) {
    if (!expected.contains(r.image_id)) {
      throw DataError("estimator returned predictions for unknown image '" + r.image_id + "'");
    }
    if (r.predictions) out[r.image_id] = *r.predictions;
  }
  for (const auto& s : scenes) {
    if (!out.contains(s.image_id)) {
      throw DataError("estimator output has no predictions for image '" + s.image_id + "'");
    }
  }
  return out;
}

}  // namespace coarsepoint::ingest
