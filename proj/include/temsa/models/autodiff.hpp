#pragma once

#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace temsa::models::ad {

using Matrix = Eigen::MatrixXd;

/// Named trainable tensor. `grad` has the shape of `value` and accumulates
/// across backward passes until zero_grad().
struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;
    bool trainable = true;
};

/// Owns a model's parameters in insertion order.
class ParameterStore {
public:
    Parameter& add(const std::string& name, Matrix init, bool trainable = true);
    Parameter& at(const std::string& name);
    const Parameter& at(const std::string& name) const;
    bool contains(const std::string& name) const { return index_.count(name) > 0; }

    std::vector<Parameter*> all();
    std::vector<const Parameter*> all() const;
    void zero_grad();
    std::size_t scalar_count() const;
    /// Sets `trainable` on every parameter whose name starts with `prefix`.
    void set_trainable(const std::string& prefix, bool trainable);

private:
    std::vector<std::unique_ptr<Parameter>> params_;
    std::unordered_map<std::string, std::size_t> index_;
};

class Tape;

/// Handle to a value recorded on a Tape.
class Var {
public:
    Var() = default;
    Var(Tape* tape, int id) : tape_(tape), id_(id) {}

    const Matrix& value() const;
    /// Gradient after Tape::backward(); zero-sized if nothing flowed here.
    const Matrix& grad() const;
    Eigen::Index rows() const { return value().rows(); }
    Eigen::Index cols() const { return value().cols(); }
    int id() const { return id_; }
    Tape* tape() const { return tape_; }
    bool valid() const { return tape_ != nullptr; }

private:
    Tape* tape_ = nullptr;
    int id_ = -1;
};

/// Records a computation for reverse-mode differentiation. A tape built with
/// record=false keeps values only, which is what inference uses.
class Tape {
public:
    explicit Tape(bool record = true) : record_(record) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    bool recording() const { return record_; }

    Var constant(Matrix value);
    /// Differentiable input that is not a Parameter (used by gradient checks).
    Var input(Matrix value);
    /// Leaf bound to a parameter; repeated calls return the same node.
    Var param(Parameter& p);

    /// Backpropagates from a 1x1 node and adds leaf gradients into trainable
    /// parameters' `grad`.
    void backward(const Var& scalar);

    using Backprop = std::function<void(Tape&, int self)>;
    Var push(Matrix value, std::vector<int> parents, Backprop backprop);

    const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    const Matrix& grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
    bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
    /// Adds `g` into the gradient of node `id` if that node needs one.
    void accumulate(int id, const Matrix& g);
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool needs_grad = false;
        Backprop backprop;
        Parameter* param = nullptr;
    };
    bool record_;
    std::vector<Node> nodes_;
    std::unordered_map<Parameter*, int> param_nodes_;
};

// --- Operations ------------------------------------------------------------

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
/// a + row, with the 1 x n row broadcast over every row of a.
Var add_row(const Var& a, const Var& row);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var mul_const(const Var& a, const Matrix& m);
Var add_const(const Var& a, const Matrix& m);
/// mask .* a + (1 - mask) .* b for a constant 0/1 mask.
Var blend(const Matrix& mask, const Var& a, const Var& b);

Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var relu(const Var& a);
/// Exact (erf) GELU.
Var gelu(const Var& a);

Var softmax_rows(const Var& a);
Var log_softmax_rows(const Var& a);
/// Per-row normalisation with 1 x n gain and bias.
Var layer_norm_rows(const Var& x, const Var& gamma, const Var& beta, double eps);

Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count);
Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index count);
Var transpose(const Var& a);
/// Rows of `table` picked by `indices` (embedding lookup).
Var gather_rows(const Var& table, const std::vector<int>& indices);
Var sum(const Var& a);
/// Mean negative log-likelihood of `targets` under row-wise softmax(logits).
Var cross_entropy(const Var& logits, const std::vector<int>& targets);

/// Scalar elementwise helpers shared with reference code.
double gelu_value(double x);
Matrix softmax_rows_value(const Matrix& logits);

}  // namespace temsa::models::ad
