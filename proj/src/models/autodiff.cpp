#include "temsa/models/autodiff.hpp"

#include <cmath>

#include "temsa/common.hpp"

namespace temsa::models::ad {

// --- ParameterStore ---------------------------------------------------------

Parameter& ParameterStore::add(const std::string& name, Matrix init, bool trainable) {
    if (index_.count(name)) throw Error("duplicate parameter '" + name + "'");
    auto p = std::make_unique<Parameter>();
    p->name = name;
    p->grad = Matrix::Zero(init.rows(), init.cols());
    p->value = std::move(init);
    p->trainable = trainable;
    index_.emplace(name, params_.size());
    params_.push_back(std::move(p));
    return *params_.back();
}

Parameter& ParameterStore::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("no parameter named '" + name + "'");
    return *params_[it->second];
}

const Parameter& ParameterStore::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("no parameter named '" + name + "'");
    return *params_[it->second];
}

std::vector<Parameter*> ParameterStore::all() {
    std::vector<Parameter*> out;
    for (auto& p : params_) out.push_back(p.get());
    return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
    std::vector<const Parameter*> out;
    for (const auto& p : params_) out.push_back(p.get());
    return out;
}

void ParameterStore::zero_grad() {
    for (auto& p : params_) p->grad.setZero();
}

std::size_t ParameterStore::scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
    return n;
}

void ParameterStore::set_trainable(const std::string& prefix, bool trainable) {
    for (auto& p : params_)
        if (p->name.rfind(prefix, 0) == 0) p->trainable = trainable;
}

// --- Var / Tape ---------------------------------------------------------------

const Matrix& Var::value() const { return tape_->value(id_); }
const Matrix& Var::grad() const { return tape_->grad(id_); }

Var Tape::push(Matrix value, std::vector<int> parents, Backprop backprop) {
    Node node;
    node.value = std::move(value);
    if (record_) {
        for (int p : parents)
            if (nodes_[static_cast<std::size_t>(p)].needs_grad) node.needs_grad = true;
        if (node.needs_grad) node.backprop = std::move(backprop);
    }
    nodes_.push_back(std::move(node));
    return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::constant(Matrix value) { return push(std::move(value), {}, nullptr); }

Var Tape::input(Matrix value) {
    Var v = push(std::move(value), {}, nullptr);
    nodes_.back().needs_grad = record_;
    return v;
}

Var Tape::param(Parameter& p) {
    if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
    Var v = push(p.value, {}, nullptr);
    auto& node = nodes_.back();
    node.needs_grad = record_ && p.trainable;
    node.param = &p;
    param_nodes_.emplace(&p, v.id());
    return v;
}

void Tape::accumulate(int id, const Matrix& g) {
    auto& node = nodes_[static_cast<std::size_t>(id)];
    if (!node.needs_grad) return;
    if (node.grad.size() == 0)
        node.grad = g;
    else
        node.grad += g;
}

void Tape::backward(const Var& scalar) {
    if (!record_) throw Error("backward() on a tape that does not record");
    if (scalar.rows() != 1 || scalar.cols() != 1) throw Error("backward() needs a 1x1 value");
    auto& root = nodes_[static_cast<std::size_t>(scalar.id())];
    if (!root.needs_grad) return;
    root.grad = Matrix::Ones(1, 1);
    for (int id = scalar.id(); id >= 0; --id) {
        auto& node = nodes_[static_cast<std::size_t>(id)];
        if (node.grad.size() == 0) continue;
        if (node.backprop) node.backprop(*this, id);
        if (node.param && node.param->trainable) node.param->grad += node.grad;
    }
}

// --- Operations ---------------------------------------------------------------

namespace {
Tape& tape_of(const Var& a) { return *a.tape(); }

void check_same_shape(const Var& a, const Var& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}
}  // namespace

Var matmul(const Var& a, const Var& b) {
    if (a.cols() != b.rows())
        throw Error("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                    std::to_string(b.rows()) + ")");
    const int ia = a.id(), ib = b.id();
    return tape_of(a).push(a.value() * b.value(), {ia, ib}, [ia, ib](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        if (t.needs_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
        if (t.needs_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
    });
}

Var add(const Var& a, const Var& b) {
    check_same_shape(a, b, "add");
    const int ia = a.id(), ib = b.id();
    return tape_of(a).push(a.value() + b.value(), {ia, ib}, [ia, ib](Tape& t, int self) {
        t.accumulate(ia, t.grad(self));
        t.accumulate(ib, t.grad(self));
    });
}

Var sub(const Var& a, const Var& b) {
    check_same_shape(a, b, "sub");
    const int ia = a.id(), ib = b.id();
    return tape_of(a).push(a.value() - b.value(), {ia, ib}, [ia, ib](Tape& t, int self) {
        t.accumulate(ia, t.grad(self));
        if (t.needs_grad(ib)) t.accumulate(ib, -t.grad(self));
    });
}

Var add_row(const Var& a, const Var& row) {
    if (row.rows() != 1 || row.cols() != a.cols()) throw Error("add_row: bias must be 1 x cols");
    const int ia = a.id(), ir = row.id();
    Matrix out = a.value().rowwise() + row.value().row(0);
    return tape_of(a).push(std::move(out), {ia, ir}, [ia, ir](Tape& t, int self) {
        t.accumulate(ia, t.grad(self));
        if (t.needs_grad(ir)) t.accumulate(ir, t.grad(self).colwise().sum());
    });
}

Var mul(const Var& a, const Var& b) {
    check_same_shape(a, b, "mul");
    const int ia = a.id(), ib = b.id();
    return tape_of(a).push(a.value().cwiseProduct(b.value()), {ia, ib}, [ia, ib](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        if (t.needs_grad(ia)) t.accumulate(ia, g.cwiseProduct(t.value(ib)));
        if (t.needs_grad(ib)) t.accumulate(ib, g.cwiseProduct(t.value(ia)));
    });
}

Var scale(const Var& a, double s) {
    const int ia = a.id();
    return tape_of(a).push(a.value() * s, {ia}, [ia, s](Tape& t, int self) { t.accumulate(ia, t.grad(self) * s); });
}

Var mul_const(const Var& a, const Matrix& m) {
    if (a.rows() != m.rows() || a.cols() != m.cols()) throw Error("mul_const: shape mismatch");
    const int ia = a.id();
    return tape_of(a).push(a.value().cwiseProduct(m), {ia},
                           [ia, m](Tape& t, int self) { t.accumulate(ia, t.grad(self).cwiseProduct(m)); });
}

Var add_const(const Var& a, const Matrix& m) {
    if (a.rows() != m.rows() || a.cols() != m.cols()) throw Error("add_const: shape mismatch");
    const int ia = a.id();
    return tape_of(a).push(a.value() + m, {ia}, [ia](Tape& t, int self) { t.accumulate(ia, t.grad(self)); });
}

Var blend(const Matrix& mask, const Var& a, const Var& b) {
    check_same_shape(a, b, "blend");
    if (mask.rows() != a.rows() || mask.cols() != a.cols()) throw Error("blend: mask shape mismatch");
    const int ia = a.id(), ib = b.id();
    const Matrix inverse = Matrix::Ones(mask.rows(), mask.cols()) - mask;
    Matrix out = mask.cwiseProduct(a.value()) + inverse.cwiseProduct(b.value());
    return tape_of(a).push(std::move(out), {ia, ib}, [ia, ib, mask, inverse](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        if (t.needs_grad(ia)) t.accumulate(ia, g.cwiseProduct(mask));
        if (t.needs_grad(ib)) t.accumulate(ib, g.cwiseProduct(inverse));
    });
}

Var sigmoid(const Var& a) {
    const int ia = a.id();
    Matrix y = a.value().unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    return tape_of(a).push(std::move(y), {ia}, [ia](Tape& t, int self) {
        const Matrix& y = t.value(self);
        t.accumulate(ia, t.grad(self).cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
    });
}

Var tanh(const Var& a) {
    const int ia = a.id();
    Matrix y = a.value().array().tanh().matrix();
    return tape_of(a).push(std::move(y), {ia}, [ia](Tape& t, int self) {
        const Matrix& y = t.value(self);
        t.accumulate(ia, t.grad(self).cwiseProduct((1.0 - y.array().square()).matrix()));
    });
}

Var relu(const Var& a) {
    const int ia = a.id();
    Matrix y = a.value().cwiseMax(0.0);
    return tape_of(a).push(std::move(y), {ia}, [ia](Tape& t, int self) {
        const Matrix& x = t.value(ia);
        t.accumulate(ia, t.grad(self).cwiseProduct(x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; })));
    });
}

double gelu_value(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

Var gelu(const Var& a) {
    const int ia = a.id();
    Matrix y = a.value().unaryExpr(&gelu_value);
    return tape_of(a).push(std::move(y), {ia}, [ia](Tape& t, int self) {
        const Matrix dydx = t.value(ia).unaryExpr([](double x) {
            constexpr double kInvSqrt2Pi = 0.3989422804014327;
            return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
        });
        t.accumulate(ia, t.grad(self).cwiseProduct(dydx));
    });
}

Matrix softmax_rows_value(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double m = logits.row(r).maxCoeff();
        Eigen::RowVectorXd e = (logits.row(r).array() - m).exp().matrix();
        out.row(r) = e / e.sum();
    }
    return out;
}

Var softmax_rows(const Var& a) {
    const int ia = a.id();
    return tape_of(a).push(softmax_rows_value(a.value()), {ia}, [ia](Tape& t, int self) {
        const Matrix& y = t.value(self);
        const Matrix& g = t.grad(self);
        const Eigen::VectorXd dot = g.cwiseProduct(y).rowwise().sum();
        t.accumulate(ia, y.cwiseProduct(g - dot.replicate(1, g.cols())));
    });
}

Var log_softmax_rows(const Var& a) {
    const int ia = a.id();
    const Matrix& x = a.value();
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double m = x.row(r).maxCoeff();
        const double lse = m + std::log((x.row(r).array() - m).exp().sum());
        out.row(r) = x.row(r).array() - lse;
    }
    return tape_of(a).push(std::move(out), {ia}, [ia](Tape& t, int self) {
        const Matrix p = t.value(self).array().exp().matrix();
        const Matrix& g = t.grad(self);
        const Eigen::VectorXd gsum = g.rowwise().sum();
        t.accumulate(ia, g - p.cwiseProduct(gsum.replicate(1, g.cols())));
    });
}

Var layer_norm_rows(const Var& x, const Var& gamma, const Var& beta, double eps) {
    const Eigen::Index n = x.cols();
    if (gamma.rows() != 1 || gamma.cols() != n || beta.rows() != 1 || beta.cols() != n)
        throw Error("layer_norm: gain and bias must be 1 x " + std::to_string(n));
    const Matrix& xv = x.value();
    Matrix xhat(xv.rows(), n);
    Eigen::VectorXd inv_std(xv.rows());
    for (Eigen::Index r = 0; r < xv.rows(); ++r) {
        const double mean = xv.row(r).mean();
        const double var = (xv.row(r).array() - mean).square().mean();
        inv_std(r) = 1.0 / std::sqrt(var + eps);
        xhat.row(r) = (xv.row(r).array() - mean) * inv_std(r);
    }
    Matrix out = (xhat.array().rowwise() * gamma.value().row(0).array()).matrix();
    out.rowwise() += beta.value().row(0);
    const int ix = x.id(), ig = gamma.id(), ib = beta.id();
    return tape_of(x).push(std::move(out), {ix, ig, ib}, [ix, ig, ib, xhat, inv_std](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        if (t.needs_grad(ig)) t.accumulate(ig, g.cwiseProduct(xhat).colwise().sum());
        if (t.needs_grad(ib)) t.accumulate(ib, g.colwise().sum());
        if (t.needs_grad(ix)) {
            const Matrix dxhat = (g.array().rowwise() * t.value(ig).row(0).array()).matrix();
            Matrix dx(g.rows(), g.cols());
            for (Eigen::Index r = 0; r < g.rows(); ++r) {
                const double m1 = dxhat.row(r).mean();
                const double m2 = dxhat.row(r).cwiseProduct(xhat.row(r)).mean();
                dx.row(r) = inv_std(r) * (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2);
            }
            t.accumulate(ix, dx);
        }
    });
}

Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw Error("concat_cols: nothing to concatenate");
    const Eigen::Index rows = parts[0].rows();
    Eigen::Index cols = 0;
    for (const auto& p : parts) {
        if (p.rows() != rows) throw Error("concat_cols: row counts differ");
        cols += p.cols();
    }
    Matrix out(rows, cols);
    std::vector<int> ids;
    std::vector<Eigen::Index> offsets;
    Eigen::Index at = 0;
    for (const auto& p : parts) {
        out.middleCols(at, p.cols()) = p.value();
        ids.push_back(p.id());
        offsets.push_back(at);
        at += p.cols();
    }
    return tape_of(parts[0]).push(std::move(out), ids, [ids, offsets](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        for (std::size_t k = 0; k < ids.size(); ++k)
            if (t.needs_grad(ids[k])) t.accumulate(ids[k], g.middleCols(offsets[k], t.value(ids[k]).cols()));
    });
}

Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw Error("concat_rows: nothing to concatenate");
    const Eigen::Index cols = parts[0].cols();
    Eigen::Index rows = 0;
    for (const auto& p : parts) {
        if (p.cols() != cols) throw Error("concat_rows: column counts differ");
        rows += p.rows();
    }
    Matrix out(rows, cols);
    std::vector<int> ids;
    std::vector<Eigen::Index> offsets;
    Eigen::Index at = 0;
    for (const auto& p : parts) {
        out.middleRows(at, p.rows()) = p.value();
        ids.push_back(p.id());
        offsets.push_back(at);
        at += p.rows();
    }
    return tape_of(parts[0]).push(std::move(out), ids, [ids, offsets](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        for (std::size_t k = 0; k < ids.size(); ++k)
            if (t.needs_grad(ids[k])) t.accumulate(ids[k], g.middleRows(offsets[k], t.value(ids[k]).rows()));
    });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count) {
    if (start < 0 || count < 0 || start + count > a.cols()) throw Error("slice_cols: out of range");
    const int ia = a.id();
    return tape_of(a).push(a.value().middleCols(start, count), {ia}, [ia, start, count](Tape& t, int self) {
        Matrix g = Matrix::Zero(t.value(ia).rows(), t.value(ia).cols());
        g.middleCols(start, count) = t.grad(self);
        t.accumulate(ia, g);
    });
}

Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index count) {
    if (start < 0 || count < 0 || start + count > a.rows()) throw Error("slice_rows: out of range");
    const int ia = a.id();
    return tape_of(a).push(a.value().middleRows(start, count), {ia}, [ia, start, count](Tape& t, int self) {
        Matrix g = Matrix::Zero(t.value(ia).rows(), t.value(ia).cols());
        g.middleRows(start, count) = t.grad(self);
        t.accumulate(ia, g);
    });
}

Var transpose(const Var& a) {
    const int ia = a.id();
    return tape_of(a).push(a.value().transpose(), {ia},
                           [ia](Tape& t, int self) { t.accumulate(ia, t.grad(self).transpose()); });
}

Var gather_rows(const Var& table, const std::vector<int>& indices) {
    const Matrix& tv = table.value();
    Matrix out(static_cast<Eigen::Index>(indices.size()), tv.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] < 0 || indices[i] >= tv.rows())
            throw Error("index " + std::to_string(indices[i]) + " outside table of " + std::to_string(tv.rows()) +
                        " rows");
        out.row(static_cast<Eigen::Index>(i)) = tv.row(indices[i]);
    }
    const int it = table.id();
    return tape_of(table).push(std::move(out), {it}, [it, indices](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        Matrix dt = Matrix::Zero(t.value(it).rows(), t.value(it).cols());
        for (std::size_t i = 0; i < indices.size(); ++i) dt.row(indices[i]) += g.row(static_cast<Eigen::Index>(i));
        t.accumulate(it, dt);
    });
}

Var sum(const Var& a) {
    const int ia = a.id();
    Matrix out(1, 1);
    out(0, 0) = a.value().sum();
    return tape_of(a).push(std::move(out), {ia}, [ia](Tape& t, int self) {
        t.accumulate(ia, Matrix::Constant(t.value(ia).rows(), t.value(ia).cols(), t.grad(self)(0, 0)));
    });
}

Var cross_entropy(const Var& logits, const std::vector<int>& targets) {
    const Matrix& x = logits.value();
    if (static_cast<std::size_t>(x.rows()) != targets.size()) throw Error("cross_entropy: one target per row");
    if (targets.empty()) throw Error("cross_entropy: empty batch");
    const Matrix p = softmax_rows_value(x);
    double loss = 0.0;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const int y = targets[static_cast<std::size_t>(r)];
        if (y < 0 || y >= x.cols()) throw Error("cross_entropy: target out of range");
        const double m = x.row(r).maxCoeff();
        const double lse = m + std::log((x.row(r).array() - m).exp().sum());
        loss += lse - x(r, y);
    }
    const double n = static_cast<double>(x.rows());
    Matrix out(1, 1);
    out(0, 0) = loss / n;
    const int il = logits.id();
    return tape_of(logits).push(std::move(out), {il}, [il, p, targets, n](Tape& t, int self) {
        Matrix g = p;
        for (std::size_t r = 0; r < targets.size(); ++r) g(static_cast<Eigen::Index>(r), targets[r]) -= 1.0;
        t.accumulate(il, g * (t.grad(self)(0, 0) / n));
    });
}

}  // namespace temsa::models::ad
