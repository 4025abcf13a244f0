#include "s2g/ndgrad.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace s2g {

// ---------------------------------------------------------------------------
// parameter store

ParamStore::Entry& ParamStore::add(const std::string& name, int rows, int cols) {
  if (index_.count(name)) throw Error("duplicate parameter name: " + name);
  index_[name] = entries_.size();
  entries_.push_back(Entry{name, Mat::Zero(rows, cols), Mat::Zero(rows, cols),
                           Mat::Zero(rows, cols), Mat::Zero(rows, cols)});
  return entries_.back();
}

ParamStore::Entry& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter: " + name);
  return entries_[it->second];
}

const ParamStore::Entry& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter: " + name);
  return entries_[it->second];
}

void ParamStore::zero_grad() {
  for (auto& e : entries_) e.grad.setZero();
}

void ParamStore::scale_grads(double factor) {
  for (auto& e : entries_) e.grad *= factor;
}

// ---------------------------------------------------------------------------
// tape

void Tape::check_finite(const Mat& m, const char* op) const {
  if (!m.allFinite()) throw NonFinite(std::string("non-finite value out of ") + op);
}

Var Tape::emplace(Mat value, std::vector<int> parents,
                  std::function<void(Tape&, Node&)> backprop) {
  bool needs = false;
  for (int p : parents) {
    if (nodes_[static_cast<std::size_t>(p)].needs_grad) {
      needs = true;
      break;
    }
  }
  Node node;
  node.value = std::move(value);
  node.parents = std::move(parents);
  node.backprop = needs ? std::move(backprop) : nullptr;
  node.needs_grad = needs;
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Mat& Tape::grad_of(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Tape::param(ParamStore::Entry& entry) {
  auto it = param_cache_.find(&entry);
  if (it != param_cache_.end()) return Var{it->second};
  Node node;
  node.value = entry.value;
  node.param = &entry;
  node.needs_grad = true;
  node.backprop = [](Tape&, Node& self) { self.param->grad += self.grad; };
  nodes_.push_back(std::move(node));
  int id = static_cast<int>(nodes_.size()) - 1;
  param_cache_[&entry] = id;
  return Var{id};
}

Var Tape::constant(Mat value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::matmul(Var a, Var b) {
  const Mat& A = value_of(a.id);
  const Mat& B = value_of(b.id);
  if (A.cols() != B.rows()) {
    throw ShapeMismatch("matmul: " + std::to_string(A.rows()) + "x" + std::to_string(A.cols()) +
                        " times " + std::to_string(B.rows()) + "x" + std::to_string(B.cols()));
  }
  Mat out = A * B;
  check_finite(out, "matmul");
  return emplace(std::move(out), {a.id, b.id}, [](Tape& t, Node& self) {
    const Mat& G = self.grad;
    const Mat& A2 = t.value_of(self.parents[0]);
    const Mat& B2 = t.value_of(self.parents[1]);
    if (t.nodes_[static_cast<std::size_t>(self.parents[0])].needs_grad) {
      t.grad_of(self.parents[0]) += G * B2.transpose();
    }
    if (t.nodes_[static_cast<std::size_t>(self.parents[1])].needs_grad) {
      t.grad_of(self.parents[1]) += A2.transpose() * G;
    }
  });
}

static void require_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch(std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
  }
}

Var Tape::add(Var a, Var b) {
  const Mat& A = value_of(a.id);
  const Mat& B = value_of(b.id);
  require_same_shape(A, B, "add");
  Mat out = A + B;
  check_finite(out, "add");
  return emplace(std::move(out), {a.id, b.id}, [](Tape& t, Node& self) {
    for (int p : self.parents) {
      if (t.nodes_[static_cast<std::size_t>(p)].needs_grad) t.grad_of(p) += self.grad;
    }
  });
}

Var Tape::sub(Var a, Var b) {
  const Mat& A = value_of(a.id);
  const Mat& B = value_of(b.id);
  require_same_shape(A, B, "sub");
  Mat out = A - B;
  check_finite(out, "sub");
  return emplace(std::move(out), {a.id, b.id}, [](Tape& t, Node& self) {
    if (t.nodes_[static_cast<std::size_t>(self.parents[0])].needs_grad) {
      t.grad_of(self.parents[0]) += self.grad;
    }
    if (t.nodes_[static_cast<std::size_t>(self.parents[1])].needs_grad) {
      t.grad_of(self.parents[1]) -= self.grad;
    }
  });
}

Var Tape::mul(Var a, Var b) {
  const Mat& A = value_of(a.id);
  const Mat& B = value_of(b.id);
  require_same_shape(A, B, "mul");
  Mat out = A.cwiseProduct(B);
  check_finite(out, "mul");
  return emplace(std::move(out), {a.id, b.id}, [](Tape& t, Node& self) {
    const Mat& A2 = t.value_of(self.parents[0]);
    const Mat& B2 = t.value_of(self.parents[1]);
    if (t.nodes_[static_cast<std::size_t>(self.parents[0])].needs_grad) {
      t.grad_of(self.parents[0]) += self.grad.cwiseProduct(B2);
    }
    if (t.nodes_[static_cast<std::size_t>(self.parents[1])].needs_grad) {
      t.grad_of(self.parents[1]) += self.grad.cwiseProduct(A2);
    }
  });
}

Var Tape::add_rowwise(Var mat, Var row) {
  const Mat& A = value_of(mat.id);
  const Mat& R = value_of(row.id);
  if (R.rows() != 1 || R.cols() != A.cols()) {
    throw ShapeMismatch("add_rowwise: row must be 1x" + std::to_string(A.cols()));
  }
  Mat out = A.rowwise() + R.row(0);
  check_finite(out, "add_rowwise");
  return emplace(std::move(out), {mat.id, row.id}, [](Tape& t, Node& self) {
    if (t.nodes_[static_cast<std::size_t>(self.parents[0])].needs_grad) {
      t.grad_of(self.parents[0]) += self.grad;
    }
    if (t.nodes_[static_cast<std::size_t>(self.parents[1])].needs_grad) {
      t.grad_of(self.parents[1]).row(0) += self.grad.colwise().sum();
    }
  });
}

Var Tape::scale(Var a, double c) {
  Mat out = value_of(a.id) * c;
  check_finite(out, "scale");
  return emplace(std::move(out), {a.id}, [c](Tape& t, Node& self) {
    if (t.nodes_[static_cast<std::size_t>(self.parents[0])].needs_grad) {
      t.grad_of(self.parents[0]) += self.grad * c;
    }
  });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat_cols: no inputs");
  Eigen::Index rows = value_of(parts[0].id).rows();
  Eigen::Index cols = 0;
  std::vector<int> ids;
  for (Var v : parts) {
    const Mat& m = value_of(v.id);
    if (m.rows() != rows) throw ShapeMismatch("concat_cols: row mismatch");
    cols += m.cols();
    ids.push_back(v.id);
  }
  Mat out(rows, cols);
  Eigen::Index off = 0;
  for (Var v : parts) {
    const Mat& m = value_of(v.id);
    out.middleCols(off, m.cols()) = m;
    off += m.cols();
  }
  return emplace(std::move(out), std::move(ids), [](Tape& t, Node& self) {
    Eigen::Index off2 = 0;
    for (int p : self.parents) {
      Eigen::Index w = t.value_of(p).cols();
      if (t.nodes_[static_cast<std::size_t>(p)].needs_grad) {
        t.grad_of(p) += self.grad.middleCols(off2, w);
      }
      off2 += w;
    }
  });
}

Var Tape::stack_rows(const std::vector<Var>& rows) {
  if (rows.empty()) throw ShapeMismatch("stack_rows: no inputs");
  Eigen::Index cols = value_of(rows[0].id).cols();
  std::vector<int> ids;
  for (Var v : rows) {
    const Mat& m = value_of(v.id);
    if (m.rows() != 1 || m.cols() != cols) throw ShapeMismatch("stack_rows: need 1-row inputs");
    ids.push_back(v.id);
  }
  Mat out(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = value_of(rows[i].id).row(0);
  }
  return emplace(std::move(out), std::move(ids), [](Tape& t, Node& self) {
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      int p = self.parents[i];
      if (t.nodes_[static_cast<std::size_t>(p)].needs_grad) {
        t.grad_of(p).row(0) += self.grad.row(static_cast<Eigen::Index>(i));
      }
    }
  });
}

Var Tape::gather_rows(Var source, std::vector<int> rows) {
  const Mat& S = value_of(source.id);
  Mat out(static_cast<Eigen::Index>(rows.size()), S.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    int r = rows[i];
    if (r < 0 || r >= S.rows()) throw ShapeMismatch("gather_rows: row index out of range");
    out.row(static_cast<Eigen::Index>(i)) = S.row(r);
  }
  return emplace(std::move(out), {source.id}, [idx = std::move(rows)](Tape& t, Node& self) {
    if (!t.nodes_[static_cast<std::size_t>(self.parents[0])].needs_grad) return;
    Mat& g = t.grad_of(self.parents[0]);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      g.row(idx[i]) += self.grad.row(static_cast<Eigen::Index>(i));
    }
  });
}

Var Tape::transpose(Var a) {
  Mat out = value_of(a.id).transpose();
  return emplace(std::move(out), {a.id}, [](Tape& t, Node& self) {
    if (t.nodes_[static_cast<std::size_t>(self.parents[0])].needs_grad) {
      t.grad_of(self.parents[0]) += self.grad.transpose();
    }
  });
}

Var Tape::sigmoid(Var a) {
  Mat out = value_of(a.id).unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  check_finite(out, "sigmoid");
  return emplace(std::move(out), {a.id}, [](Tape& t, Node& self) {
    if (!t.nodes_[static_cast<std::size_t>(self.parents[0])].needs_grad) return;
    const Mat& y = self.value;
    t.grad_of(self.parents[0]) +=
        self.grad.cwiseProduct(y.cwiseProduct(Mat::Ones(y.rows(), y.cols()) - y));
  });
}

Var Tape::tanh(Var a) {
  Mat out = value_of(a.id).unaryExpr([](double x) { return std::tanh(x); });
  check_finite(out, "tanh");
  return emplace(std::move(out), {a.id}, [](Tape& t, Node& self) {
    if (!t.nodes_[static_cast<std::size_t>(self.parents[0])].needs_grad) return;
    const Mat& y = self.value;
    t.grad_of(self.parents[0]) +=
        self.grad.cwiseProduct(Mat::Ones(y.rows(), y.cols()) - y.cwiseProduct(y));
  });
}

Var Tape::relu(Var a) {
  Mat out = value_of(a.id).cwiseMax(0.0);
  return emplace(std::move(out), {a.id}, [](Tape& t, Node& self) {
    if (!t.nodes_[static_cast<std::size_t>(self.parents[0])].needs_grad) return;
    const Mat& x = t.value_of(self.parents[0]);
    t.grad_of(self.parents[0]) +=
        self.grad.cwiseProduct(x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
  });
}

Var Tape::softmax_row(Var a) {
  const Mat& X = value_of(a.id);
  Mat out(X.rows(), X.cols());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    double mx = X.row(r).maxCoeff();
    Eigen::ArrayXd e = (X.row(r).array() - mx).exp();
    out.row(r) = (e / e.sum()).matrix();
  }
  check_finite(out, "softmax");
  return emplace(std::move(out), {a.id}, [](Tape& t, Node& self) {
    if (!t.nodes_[static_cast<std::size_t>(self.parents[0])].needs_grad) return;
    const Mat& y = self.value;
    Mat& g = t.grad_of(self.parents[0]);
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      double dot = self.grad.row(r).cwiseProduct(y.row(r)).sum();
      g.row(r) += y.row(r).cwiseProduct((self.grad.row(r).array() - dot).matrix());
    }
  });
}

Var Tape::dropout(Var a, double p) {
  if (!train_ || p <= 0.0) return a;
  if (p >= 1.0) throw Error("dropout probability must be below 1");
  if (!rng_) throw Error("dropout in train mode requires an rng");
  const Mat& X = value_of(a.id);
  Mat mask(X.rows(), X.cols());
  double keep = 1.0 - p;
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
      mask(r, c) = rng_->bernoulli(keep) ? 1.0 / keep : 0.0;
    }
  }
  Mat out = X.cwiseProduct(mask);
  return emplace(std::move(out), {a.id}, [mask = std::move(mask)](Tape& t, Node& self) {
    if (!t.nodes_[static_cast<std::size_t>(self.parents[0])].needs_grad) return;
    t.grad_of(self.parents[0]) += self.grad.cwiseProduct(mask);
  });
}

Var Tape::sum_all(Var a) {
  Mat out(1, 1);
  out(0, 0) = value_of(a.id).sum();
  check_finite(out, "sum");
  return emplace(std::move(out), {a.id}, [](Tape& t, Node& self) {
    if (!t.nodes_[static_cast<std::size_t>(self.parents[0])].needs_grad) return;
    t.grad_of(self.parents[0]).array() += self.grad(0, 0);
  });
}

Var Tape::neg_log_pick(Var dist, int index) {
  const Mat& D = value_of(dist.id);
  if (D.rows() != 1 || index < 0 || index >= D.cols()) {
    throw ShapeMismatch("neg_log_pick: index " + std::to_string(index) + " outside 1x" +
                        std::to_string(D.cols()));
  }
  Mat out(1, 1);
  out(0, 0) = -std::log(D(0, index));
  check_finite(out, "neg_log_pick");
  return emplace(std::move(out), {dist.id}, [index](Tape& t, Node& self) {
    if (!t.nodes_[static_cast<std::size_t>(self.parents[0])].needs_grad) return;
    const Mat& d = t.value_of(self.parents[0]);
    t.grad_of(self.parents[0])(0, index) -= self.grad(0, 0) / d(0, index);
  });
}

void Tape::backward(Var loss) {
  Node& top = nodes_[static_cast<std::size_t>(loss.id)];
  if (top.value.rows() != 1 || top.value.cols() != 1) {
    throw ShapeMismatch("backward: loss must be a scalar");
  }
  // find everything the loss depends on
  std::vector<char> reachable(nodes_.size(), 0);
  std::vector<int> stack{loss.id};
  reachable[static_cast<std::size_t>(loss.id)] = 1;
  bool any_param = false;
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.param && n.needs_grad) any_param = true;
    for (int p : n.parents) {
      if (!reachable[static_cast<std::size_t>(p)] &&
          nodes_[static_cast<std::size_t>(p)].needs_grad) {
        reachable[static_cast<std::size_t>(p)] = 1;
        stack.push_back(p);
      }
    }
  }
  if (!any_param) throw NoPath();

  grad_of(loss.id)(0, 0) += 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!reachable[static_cast<std::size_t>(id)] || !n.needs_grad || !n.backprop) continue;
    if (n.grad.size() == 0) continue;  // no gradient ever flowed here
    n.backprop(*this, n);
  }
}

// ---------------------------------------------------------------------------
// optimizer

void adam_step(ParamStore& store, const AdamConfig& cfg) {
  if (cfg.clip_norm > 0.0) {
    double sq = 0.0;
    for (const auto& e : store.entries()) sq += e.grad.squaredNorm();
    double norm = std::sqrt(sq);
    if (norm > cfg.clip_norm) store.scale_grads(cfg.clip_norm / norm);
  }
  store.step += 1;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(store.step));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(store.step));
  for (auto& e : store.entries()) {
    e.m = cfg.beta1 * e.m + (1.0 - cfg.beta1) * e.grad;
    e.v = cfg.beta2 * e.v + (1.0 - cfg.beta2) * e.grad.cwiseProduct(e.grad);
    Mat mhat = e.m / bc1;
    Mat vhat = e.v / bc2;
    if (cfg.weight_decay != 0.0) e.value -= cfg.lr * cfg.weight_decay * e.value;
    e.value -= cfg.lr * mhat.cwiseQuotient((vhat.cwiseSqrt().array() + cfg.eps).matrix());
  }
  store.zero_grad();
}

double lr_schedule(double base_lr, int epoch, int halve_every) {
  return base_lr * std::pow(0.5, static_cast<double>(epoch / halve_every));
}

void init_uniform_fanin(Mat& m, int fan_in, Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-bound, bound);
  }
}

void init_normal(Mat& m, double stddev, Rng& rng) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.normal(0.0, stddev);
  }
}

// ---------------------------------------------------------------------------
// checkpoints

static constexpr char kMagic[8] = {'S', '2', 'G', 'C', 'K', 'P', 'T', '1'};

void save_checkpoint(const ParamStore& store, const std::string& path,
                     const std::string& extra_header_json) {
  nlohmann::json header;
  if (!extra_header_json.empty()) {
    header = nlohmann::json::parse(extra_header_json);
    if (!header.is_object()) throw Error("checkpoint extra header must be a JSON object");
  }
  header["format"] = 1;
  header["step"] = store.step;
  header["seed"] = store.seed;
  nlohmann::json params = nlohmann::json::array();
  for (const auto& e : store.entries()) {
    params.push_back({{"name", e.name}, {"rows", e.value.rows()}, {"cols", e.value.cols()}});
  }
  header["params"] = params;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint: " + path);
  std::string hs = header.dump();
  uint64_t len = hs.size();
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& e : store.entries()) {
    out.write(reinterpret_cast<const char*>(e.value.data()),
              static_cast<std::streamsize>(sizeof(double) * e.value.size()));
  }
  if (!out) throw Error("short write on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound(path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error("not a checkpoint file: " + path);
  }
  uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string hs(len, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(len));
  if (!in) throw Error("truncated checkpoint header: " + path);
  nlohmann::json header = nlohmann::json::parse(hs);

  Checkpoint ckpt;
  ckpt.header_json = hs;
  ckpt.step = header.at("step").get<long>();
  ckpt.seed = header.at("seed").get<uint64_t>();
  for (const auto& p : header.at("params")) {
    Mat m(p.at("rows").get<Eigen::Index>(), p.at("cols").get<Eigen::Index>());
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!in) throw Error("truncated checkpoint data: " + path);
    ckpt.params.emplace_back(p.at("name").get<std::string>(), std::move(m));
  }
  return ckpt;
}

void restore_checkpoint(ParamStore& store, const Checkpoint& ckpt) {
  if (ckpt.params.size() != store.entries().size()) {
    throw ShapeMismatch("checkpoint holds " + std::to_string(ckpt.params.size()) +
                        " parameters, model expects " + std::to_string(store.entries().size()));
  }
  for (const auto& [name, value] : ckpt.params) {
    if (!store.contains(name)) throw ShapeMismatch("checkpoint parameter not in model: " + name);
    auto& e = store.at(name);
    if (e.value.rows() != value.rows() || e.value.cols() != value.cols()) {
      throw ShapeMismatch("parameter " + name + ": checkpoint shape " +
                          std::to_string(value.rows()) + "x" + std::to_string(value.cols()) +
                          " vs model " + std::to_string(e.value.rows()) + "x" +
                          std::to_string(e.value.cols()));
    }
    e.value = value;
  }
  store.step = ckpt.step;
  store.seed = ckpt.seed;
}

}  // namespace s2g
