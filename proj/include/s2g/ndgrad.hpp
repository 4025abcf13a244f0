#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "s2g/errors.hpp"

namespace s2g {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Seeded random stream with hand-rolled distributions so that the same
/// seed produces the same numbers on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9E3779B97F4A7C15ull) {}

  uint64_t next_u64() {
    // splitmix64
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal(double mean, double stddev) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + stddev * spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return mean + stddev * u * m;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform integer in [0, n).
  int below(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(below(i + 1))]);
    }
  }

 private:
  uint64_t state_;
  double spare_ = 0;
  bool have_spare_ = false;
};

/// Named parameters with Adam moment buffers.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Mat value;
    Mat grad;
    Mat m;
    Mat v;
  };

  Entry& add(const std::string& name, int rows, int cols);
  Entry& at(const std::string& name);
  const Entry& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  std::deque<Entry>& entries() { return entries_; }
  const std::deque<Entry>& entries() const { return entries_; }

  void zero_grad();
  void scale_grads(double factor);

  long step = 0;
  uint64_t seed = 0;

 private:
  // deque keeps Entry references stable while tapes hold pointers to them
  std::deque<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

class Tape;

/// Handle to a node on a tape; cheap to copy.
struct Var {
  int id = -1;
};

/// Reverse-mode computation tape over dense double arrays. Every forward op
/// records how to push gradients back to its inputs; backward() replays the
/// records in reverse. A tape lives for one forward/backward pass and is
/// confined to a single thread.
class Tape {
 public:
  explicit Tape(bool train_mode = false, Rng* dropout_rng = nullptr)
      : train_(train_mode), rng_(dropout_rng) {}

  bool train_mode() const { return train_; }

  /// Leaf bound to a trainable parameter; backward accumulates into its grad.
  Var param(ParamStore::Entry& entry);
  /// Leaf holding a fixed input; no gradient flows into it.
  Var constant(Mat value);

  const Mat& val(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);                  // elementwise
  Var add_rowwise(Var mat, Var row);      // mat (n,m) + row (1,m) broadcast
  Var scale(Var a, double c);
  Var concat_cols(const std::vector<Var>& parts);  // (1,m1)...(1,mk) -> (1,sum)
  Var stack_rows(const std::vector<Var>& rows);    // k x (1,m) -> (k,m)
  Var gather_rows(Var source, std::vector<int> rows);
  Var transpose(Var a);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var relu(Var a);
  Var softmax_row(Var a);  // softmax over each row
  Var dropout(Var a, double p);  // identity when p==0 or tape not in train mode
  Var sum_all(Var a);            // (1,1)
  Var neg_log_pick(Var dist, int index);  // -log(dist[0, index]) as (1,1)

  /// Accumulate d(loss)/d(param) into every reachable parameter entry.
  /// loss must be scalar; throws NoPath when no parameter is reachable.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::vector<int> parents;
    std::function<void(Tape&, Node&)> backprop;
    ParamStore::Entry* param = nullptr;
    bool needs_grad = false;
  };

  Var emplace(Mat value, std::vector<int> parents, std::function<void(Tape&, Node&)> backprop);
  Mat& grad_of(int id);
  const Mat& value_of(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  void check_finite(const Mat& m, const char* op) const;

  std::vector<Node> nodes_;
  std::unordered_map<const ParamStore::Entry*, int> param_cache_;
  bool train_;
  Rng* rng_;
};

struct AdamConfig {
  double lr = 1e-3;
  double weight_decay = 0.0;
  double clip_norm = 0.0;  // 0 disables clipping
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One Adam step with decoupled weight decay. Gradients are clipped to the
/// given global norm before the update and zeroed afterwards.
void adam_step(ParamStore& store, const AdamConfig& cfg);

/// Stepwise-halving schedule: base * 0.5^floor(epoch / halve_every).
double lr_schedule(double base_lr, int epoch, int halve_every);

// initializers
void init_uniform_fanin(Mat& m, int fan_in, Rng& rng);
void init_normal(Mat& m, double stddev, Rng& rng);

// --- checkpoints -----------------------------------------------------------

struct Checkpoint {
  // full JSON header: {"format","step","seed","params":[{name,rows,cols}],...}
  std::string header_json;
  std::vector<std::pair<std::string, Mat>> params;
  long step = 0;
  uint64_t seed = 0;
};

/// Write all parameters as little-endian 64-bit floats after a JSON header.
/// extra_header_json, when non-empty, must be a JSON object; its fields are
/// merged into the header (used for model metadata).
void save_checkpoint(const ParamStore& store, const std::string& path,
                     const std::string& extra_header_json = "");

Checkpoint load_checkpoint(const std::string& path);

/// Copy checkpoint values into an existing store. Names and shapes must
/// match exactly; throws ShapeMismatch otherwise.
void restore_checkpoint(ParamStore& store, const Checkpoint& ckpt);

}  // namespace s2g
