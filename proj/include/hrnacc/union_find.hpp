#ifndef HRNACC_UNION_FIND_HPP
#define HRNACC_UNION_FIND_HPP

#include <numeric>
#include <vector>

namespace hrnacc {

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(size_t(n)), size_(size_t(n), 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    int root = x;
    while (parent_[size_t(root)] != root) root = parent_[size_t(root)];
    while (x != root) {
      int next = parent_[size_t(x)];
      parent_[size_t(x)] = root;
      x = next;
    }
    return root;
  }

  bool merge(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[size_t(a)] < size_[size_t(b)]) std::swap(a, b);
    parent_[size_t(b)] = a;
    size_[size_t(a)] += size_[size_t(b)];
    return true;
  }

  bool connected(int a, int b) { return find(a) == find(b); }

  int count() const { return int(parent_.size()); }

  // Members per root, each list ascending; groups ordered by smallest member.
  std::vector<std::vector<int>> groups() {
    std::vector<std::vector<int>> by_root(parent_.size());
    for (int i = 0; i < int(parent_.size()); ++i) by_root[size_t(find(i))].push_back(i);
    std::vector<std::vector<int>> out;
    for (auto& g : by_root)
      if (!g.empty()) out.push_back(std::move(g));
    return out;
  }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

}  // namespace hrnacc

#endif  // HRNACC_UNION_FIND_HPP
