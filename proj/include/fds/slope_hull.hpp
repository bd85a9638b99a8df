#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace fds {

/// Upper convex hull of integer points inserted in strictly decreasing x,
/// answering "which hull point maximises the slope from q?" for query points
/// strictly to the left of every inserted point.
///
/// Points hidden by the hull can never win such a query, so the answer is an
/// exact maximum over everything inserted so far. Among points tied on the
/// maximal slope the one with the smallest x is returned.
class SuffixSlopeHull {
 public:
  struct Point {
    std::int64_t x = 0;
    std::int64_t y = 0;
  };

  void clear() { stack_.clear(); }
  bool empty() const { return stack_.empty(); }
  std::size_t size() const { return stack_.size(); }

  void push_front(Point p) {
    assert(stack_.empty() || p.x < stack_.back().x);
    // stack_.back() is the leftmost point; drop it while it is not strictly above p -> next.
    while (stack_.size() >= 2) {
      const Point& b = stack_[stack_.size() - 1];
      const Point& c = stack_[stack_.size() - 2];
      if (Wide(b.y - p.y) * (c.x - p.x) > Wide(c.y - p.y) * (b.x - p.x)) break;
      stack_.pop_back();
    }
    stack_.push_back(p);
  }

  Point best_from(Point q) const {
    assert(!stack_.empty() && q.x < stack_.back().x);
    // Hull in left-to-right order is stack_[n-1], ..., stack_[0]. Find the first
    // position i whose outgoing edge is no steeper than the slope q -> h_i.
    const std::size_t n = stack_.size();
    std::size_t lo = 0;
    std::size_t hi = n - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      const Point& a = at(mid);
      const Point& b = at(mid + 1);
      bool stop = Wide(b.y - a.y) * (a.x - q.x) <= Wide(a.y - q.y) * (b.x - a.x);
      if (stop) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    return at(lo);
  }

 private:
  using Wide = __int128;
  const Point& at(std::size_t left_to_right) const { return stack_[stack_.size() - 1 - left_to_right]; }

  std::vector<Point> stack_;
};

}  // namespace fds
