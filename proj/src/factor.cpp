#include "bnforge/factor.hpp"

#include <algorithm>

#include "bnforge/errors.hpp"

namespace bnforge {
namespace {

std::size_t product(const std::vector<std::size_t>& v) {
  std::size_t p = 1;
  for (std::size_t x : v) p *= x;
  return p;
}

}  // namespace

Factor Factor::from_cpt(const BeliefGraph& g, const Node& n) {
  if (n.cpt_dirty)
    throw Error(ErrorCode::CombinerError, "CPT of " + n.term.text() + " is not built");
  Factor f;
  f.scope = n.parents;
  f.scope.push_back(n.id);
  for (NodeId p : n.parents) f.card.push_back(g.at(p).arity());
  f.card.push_back(n.arity());
  // The CPT layout (rows by parent assignment, child fastest) is exactly
  // the row-major layout over (parents..., child).
  f.values = n.cpt;
  return f;
}

Factor Factor::indicator(const Node& n, std::size_t state) {
  Factor f;
  f.scope = {n.id};
  f.card = {n.arity()};
  f.values.assign(n.arity(), 0.0);
  f.values[state] = 1.0;
  return f;
}

std::size_t Factor::index_of(const std::vector<std::size_t>& assignment) const {
  std::size_t ix = 0;
  for (std::size_t i = 0; i < card.size(); ++i) ix = ix * card[i] + assignment[i];
  return ix;
}

bool Factor::mentions(NodeId v) const {
  return std::find(scope.begin(), scope.end(), v) != scope.end();
}

Factor Factor::multiply(const Factor& other) const {
  Factor out;
  out.scope = scope;
  out.card = card;
  for (std::size_t i = 0; i < other.scope.size(); ++i)
    if (std::find(out.scope.begin(), out.scope.end(), other.scope[i]) == out.scope.end()) {
      out.scope.push_back(other.scope[i]);
      out.card.push_back(other.card[i]);
    }
  // Positions of each operand's variables within the union scope.
  std::vector<std::size_t> pos_a(scope.size()), pos_b(other.scope.size());
  for (std::size_t i = 0; i < scope.size(); ++i) pos_a[i] = i;
  for (std::size_t i = 0; i < other.scope.size(); ++i)
    pos_b[i] = static_cast<std::size_t>(
        std::find(out.scope.begin(), out.scope.end(), other.scope[i]) - out.scope.begin());

  std::size_t total = product(out.card);
  out.values.assign(total, 0.0);
  std::vector<std::size_t> digits(out.scope.size(), 0);
  std::vector<std::size_t> da(scope.size()), db(other.scope.size());
  for (std::size_t ix = 0; ix < total; ++ix) {
    for (std::size_t i = 0; i < pos_a.size(); ++i) da[i] = digits[pos_a[i]];
    for (std::size_t i = 0; i < pos_b.size(); ++i) db[i] = digits[pos_b[i]];
    out.values[ix] = values[index_of(da)] * other.values[other.index_of(db)];
    for (std::size_t i = out.scope.size(); i-- > 0;) {
      if (++digits[i] < out.card[i]) break;
      digits[i] = 0;
    }
  }
  return out;
}

Factor Factor::sum_out(NodeId v) const {
  auto it = std::find(scope.begin(), scope.end(), v);
  if (it == scope.end()) return *this;
  std::size_t drop = static_cast<std::size_t>(it - scope.begin());
  Factor out;
  for (std::size_t i = 0; i < scope.size(); ++i)
    if (i != drop) {
      out.scope.push_back(scope[i]);
      out.card.push_back(card[i]);
    }
  out.values.assign(product(out.card), 0.0);
  std::vector<std::size_t> digits(scope.size(), 0);
  std::vector<std::size_t> kept(out.scope.size());
  for (std::size_t ix = 0; ix < values.size(); ++ix) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < scope.size(); ++i)
      if (i != drop) kept[k++] = digits[i];
    out.values[out.index_of(kept)] += values[ix];
    for (std::size_t i = scope.size(); i-- > 0;) {
      if (++digits[i] < card[i]) break;
      digits[i] = 0;
    }
  }
  return out;
}

Factor Factor::marginalize_onto(const std::vector<NodeId>& keep) const {
  Factor out = *this;
  for (NodeId v : scope)
    if (std::find(keep.begin(), keep.end(), v) == keep.end()) out = out.sum_out(v);
  return out;
}

void Factor::normalize() {
  double sum = 0.0;
  for (double v : values) sum += v;
  if (sum <= 0.0) return;
  for (double& v : values) v /= sum;
}

}  // namespace bnforge
