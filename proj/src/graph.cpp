#include "acg/graph.hpp"

#include <numeric>

namespace acg {

std::int64_t NodeTypeSequence::discrepancy() const {
  std::int64_t d = 0;
  for (const NodeType& t : nodes) d += t.out - t.in;
  return d;
}

std::int64_t StubMargins::in_total() const {
  return std::accumulate(in.begin(), in.end(), std::int64_t{0});
}

std::int64_t StubMargins::out_total() const {
  return std::accumulate(out.begin(), out.end(), std::int64_t{0});
}

std::int64_t EdgeTypeMatrix::out_margin(int k) const {
  std::int64_t s = 0;
  for (int j = 0; j <= max_degree_; ++j) s += at(k, j);
  return s;
}

std::int64_t EdgeTypeMatrix::in_margin(int j) const {
  std::int64_t s = 0;
  for (int k = 0; k <= max_degree_; ++k) s += at(k, j);
  return s;
}

std::int64_t EdgeTypeMatrix::total() const {
  return std::accumulate(cells_.begin(), cells_.end(), std::int64_t{0});
}

StubMargins EdgeTypeMatrix::margins() const {
  StubMargins m;
  m.in.resize(max_degree_ + 1);
  m.out.resize(max_degree_ + 1);
  for (int d = 0; d <= max_degree_; ++d) {
    m.in[d] = in_margin(d);
    m.out[d] = out_margin(d);
  }
  return m;
}

}  // namespace acg
