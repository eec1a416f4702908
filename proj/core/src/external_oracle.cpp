#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstring>
#include <mutex>
#include <stdexcept>
#include <string>

#include "tamper/evasion.hpp"
#include "tamper/objective.hpp"
#include "tamper/poisoning.hpp"

namespace tamper {

namespace {

// Line-oriented bidirectional pipe to a child running `sh -c command`.
class Subprocess {
 public:
  explicit Subprocess(const std::string& command) {
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0)
      throw std::runtime_error("external oracle: pipe failed");
    pid_ = fork();
    if (pid_ < 0) throw std::runtime_error("external oracle: fork failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", command.c_str(), (char*)nullptr);
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];
  }

  ~Subprocess() {
    if (in_fd_ >= 0) close(in_fd_);
    if (out_fd_ >= 0) close(out_fd_);
    if (pid_ > 0) {
      int status = 0;
      waitpid(pid_, &status, 0);
    }
  }

  void write_line(const std::string& line) {
    std::string buf = line;
    buf += '\n';
    size_t off = 0;
    while (off < buf.size()) {
      ssize_t w = write(in_fd_, buf.data() + off, buf.size() - off);
      if (w < 0) throw std::runtime_error("external oracle: write failed");
      off += static_cast<size_t>(w);
    }
  }

  void close_input() {
    if (in_fd_ >= 0) close(in_fd_);
    in_fd_ = -1;
  }

  std::string read_line() {
    std::string line;
    char c;
    while (true) {
      ssize_t r = read(out_fd_, &c, 1);
      if (r <= 0)
        throw std::runtime_error("external oracle: child closed stream");
      if (c == '\n') break;
      line += c;
    }
    return line;
  }

 private:
  pid_t pid_ = -1;
  int in_fd_ = -1, out_fd_ = -1;
};

class ExternalObjective final : public Objective {
 public:
  ExternalObjective(const ProductSpace& space, std::string command)
      : space_(&space),
        command_(std::move(command)),
        child_(std::make_unique<Subprocess>(command_)) {}

  std::string name() const override { return "external(" + command_ + ")"; }

  bool eval_raw(const TupleView& t) const override {
    std::lock_guard<std::mutex> lock(mx_);
    std::string line;
    for (uint32_t i = 0; i < t.n; ++i) {
      if (i) line += ' ';
      line += space_->block(i).token(t.value(i));
    }
    child_->write_line(line);
    std::string answer = child_->read_line();
    if (answer == "0") return false;
    if (answer == "1") return true;
    throw std::runtime_error("external oracle: expected 0 or 1, got '" +
                             answer + "'");
  }

 private:
  const ProductSpace* space_;
  std::string command_;
  mutable std::unique_ptr<Subprocess> child_;
  mutable std::mutex mx_;
};

Label parse_label(const std::string& token) {
  try {
    size_t pos = 0;
    long v = std::stol(token, &pos);
    if (pos == token.size()) return static_cast<Label>(v);
  } catch (...) {
  }
  throw std::runtime_error("external oracle: label token '" + token +
                           "' is not an integer");
}

class ExternalLabel final : public LabelFunction {
 public:
  ExternalLabel(const ProductSpace& space, std::string command)
      : space_(&space),
        command_(std::move(command)),
        child_(std::make_unique<Subprocess>(command_)) {}

  std::string name() const override { return "external(" + command_ + ")"; }

  Label classify(const TupleView& x) const override {
    std::lock_guard<std::mutex> lock(mx_);
    std::string line;
    for (uint32_t i = 0; i < x.n; ++i) {
      if (i) line += ' ';
      line += space_->block(i).token(x.value(i));
    }
    child_->write_line(line);
    return parse_label(child_->read_line());
  }

 private:
  const ProductSpace* space_;
  std::string command_;
  mutable std::unique_ptr<Subprocess> child_;
  mutable std::mutex mx_;
};

// One child process per training session: pairs, a blank line, probes, EOF;
// the child answers one label per probe.
class ExternalLearner final : public Learner {
 public:
  ExternalLearner(const ProductSpace& instance_space, std::string command)
      : space_(&instance_space), command_(std::move(command)) {}

  std::string name() const override { return "external(" + command_ + ")"; }

  void classify(std::span<const ExampleView> train,
                std::span<const TupleView> probes,
                std::vector<Label>& out) const override {
    Subprocess child(command_);
    std::string line;
    for (const auto& ex : train) {
      line.clear();
      for (uint32_t i = 0; i < ex.x.n; ++i) {
        if (i) line += ' ';
        line += space_->block(i).token(ex.x.value(i));
      }
      line += '\t';
      line += std::to_string(ex.y);
      child.write_line(line);
    }
    child.write_line("");
    for (const auto& p : probes) {
      line.clear();
      for (uint32_t i = 0; i < p.n; ++i) {
        if (i) line += ' ';
        line += space_->block(i).token(p.value(i));
      }
      child.write_line(line);
    }
    child.close_input();
    out.clear();
    out.reserve(probes.size());
    for (size_t i = 0; i < probes.size(); ++i)
      out.push_back(parse_label(child.read_line()));
  }

 private:
  const ProductSpace* space_;
  std::string command_;
};

}  // namespace

std::unique_ptr<Objective> make_external(const ProductSpace& space,
                                         std::string command) {
  return std::make_unique<ExternalObjective>(space, std::move(command));
}

std::unique_ptr<LabelFunction> make_external_label(const ProductSpace& space,
                                                   std::string command) {
  return std::make_unique<ExternalLabel>(space, std::move(command));
}

std::unique_ptr<Learner> make_external_learner(
    const ProductSpace& instance_space, std::string command) {
  return std::make_unique<ExternalLearner>(instance_space, std::move(command));
}

}  // namespace tamper
