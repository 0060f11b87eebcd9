#include "patchloom/repo/diff.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <unordered_map>

namespace patchloom::repo {

std::string normalize_whitespace(std::string_view line) {
  std::string out;
  out.reserve(line.size());
  bool pending_space = false;
  for (char ch : line) {
    if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\f' || ch == '\v') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(ch);
  }
  return out;
}

NormalizedLines normalize_lines(const std::vector<std::string>& raw) {
  NormalizedLines result;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto norm = normalize_whitespace(raw[i]);
    if (norm.empty()) continue;
    result.lines.push_back(std::move(norm));
    result.origin.push_back(i);
  }
  return result;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

namespace {

constexpr std::size_t kMaxChainLength = 64;

using Seq = std::vector<std::uint32_t>;

struct Edit {
  std::size_t a_begin, a_end, b_begin, b_end;
};

class HistogramDiffer {
 public:
  HistogramDiffer(const Seq& a, const Seq& b) : a_(a), b_(b) {}

  std::vector<Edit> run() {
    diff(0, a_.size(), 0, b_.size());
    return std::move(edits_);
  }

 private:
  void emit(std::size_t ab, std::size_t ae, std::size_t bb, std::size_t be) {
    if (ab == ae && bb == be) return;
    if (!edits_.empty() && edits_.back().a_end == ab &&
        edits_.back().b_end == bb) {
      edits_.back().a_end = ae;
      edits_.back().b_end = be;
      return;
    }
    edits_.push_back({ab, ae, bb, be});
  }

  void diff(std::size_t ab, std::size_t ae, std::size_t bb, std::size_t be) {
    // Common prefix and suffix never belong to an edit.
    while (ab < ae && bb < be && a_[ab] == b_[bb]) {
      ++ab;
      ++bb;
    }
    while (ab < ae && bb < be && a_[ae - 1] == b_[be - 1]) {
      --ae;
      --be;
    }
    if (ab == ae || bb == be) {
      emit(ab, ae, bb, be);
      return;
    }

    std::unordered_map<std::uint32_t, std::vector<std::size_t>> histogram;
    for (std::size_t i = ab; i < ae; ++i) histogram[a_[i]].push_back(i);

    std::size_t best_count = kMaxChainLength + 1;
    std::size_t best_len = 0;
    std::size_t best_a = 0, best_b = 0;
    bool any_common = false;

    for (std::size_t bi = bb; bi < be;) {
      auto it = histogram.find(b_[bi]);
      if (it == histogram.end()) {
        ++bi;
        continue;
      }
      any_common = true;
      if (it->second.size() > best_count) {
        ++bi;
        continue;
      }
      std::size_t next_bi = bi + 1;
      for (std::size_t ai : it->second) {
        std::size_t as = ai, bs = bi;
        while (as > ab && bs > bb && a_[as - 1] == b_[bs - 1]) {
          --as;
          --bs;
        }
        std::size_t aend = ai + 1, bend = bi + 1;
        while (aend < ae && bend < be && a_[aend] == b_[bend]) {
          ++aend;
          ++bend;
        }
        std::size_t low = std::numeric_limits<std::size_t>::max();
        for (std::size_t k = as; k < aend; ++k) {
          low = std::min(low, histogram[a_[k]].size());
        }
        const std::size_t len = aend - as;
        if (low < best_count || (low == best_count && len > best_len)) {
          best_count = low;
          best_len = len;
          best_a = as;
          best_b = bs;
        }
        next_bi = std::max(next_bi, bend);
      }
      bi = next_bi;
    }

    if (best_len == 0) {
      if (any_common) {
        myers(ab, ae, bb, be);
      } else {
        emit(ab, ae, bb, be);
      }
      return;
    }
    diff(ab, best_a, bb, best_b);
    diff(best_a + best_len, ae, best_b + best_len, be);
  }

  // Greedy O(ND) Myers over a region, used when every common line is too
  // frequent to anchor on.
  void myers(std::size_t ab, std::size_t ae, std::size_t bb, std::size_t be) {
    const auto n = static_cast<std::ptrdiff_t>(ae - ab);
    const auto m = static_cast<std::ptrdiff_t>(be - bb);
    const std::ptrdiff_t max = n + m;
    const std::ptrdiff_t offset = max + 1;
    std::vector<std::ptrdiff_t> v(static_cast<std::size_t>(2 * max + 3), 0);
    std::vector<std::vector<std::ptrdiff_t>> trace;
    std::ptrdiff_t final_d = 0;
    bool done = false;
    for (std::ptrdiff_t d = 0; d <= max && !done; ++d) {
      trace.push_back(v);
      for (std::ptrdiff_t k = -d; k <= d; k += 2) {
        std::ptrdiff_t x;
        if (k == -d || (k != d && v[offset + k - 1] < v[offset + k + 1])) {
          x = v[offset + k + 1];
        } else {
          x = v[offset + k - 1] + 1;
        }
        std::ptrdiff_t y = x - k;
        while (x < n && y < m && a_[ab + x] == b_[bb + y]) {
          ++x;
          ++y;
        }
        v[offset + k] = x;
        if (x >= n && y >= m) {
          final_d = d;
          done = true;
          break;
        }
      }
    }
    // Backtrack into a list of (x, y) snake points, then emit gaps.
    std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> matches;
    std::ptrdiff_t x = n, y = m;
    for (std::ptrdiff_t d = final_d; d > 0; --d) {
      const auto& vd = trace[static_cast<std::size_t>(d)];
      const std::ptrdiff_t k = x - y;
      std::ptrdiff_t prev_k;
      if (k == -d || (k != d && vd[offset + k - 1] < vd[offset + k + 1])) {
        prev_k = k + 1;
      } else {
        prev_k = k - 1;
      }
      const std::ptrdiff_t prev_x = vd[offset + prev_k];
      const std::ptrdiff_t prev_y = prev_x - prev_k;
      while (x > prev_x && y > prev_y) {
        --x;
        --y;
        matches.emplace_back(x, y);
      }
      x = prev_x;
      y = prev_y;
    }
    while (x > 0 && y > 0) {
      --x;
      --y;
      matches.emplace_back(x, y);
    }
    std::reverse(matches.begin(), matches.end());
    std::ptrdiff_t pa = 0, pb = 0;
    for (auto [mx, my] : matches) {
      emit(ab + static_cast<std::size_t>(pa), ab + static_cast<std::size_t>(mx),
           bb + static_cast<std::size_t>(pb), bb + static_cast<std::size_t>(my));
      pa = mx + 1;
      pb = my + 1;
    }
    emit(ab + static_cast<std::size_t>(pa), ae, bb + static_cast<std::size_t>(pb),
         be);
  }

  const Seq& a_;
  const Seq& b_;
  std::vector<Edit> edits_;
};

}  // namespace

std::vector<RawHunk> histogram_diff(const std::vector<std::string>& pre,
                                    const std::vector<std::string>& post) {
  std::unordered_map<std::string_view, std::uint32_t> ids;
  auto intern = [&ids](const std::vector<std::string>& lines) {
    Seq seq;
    seq.reserve(lines.size());
    for (const auto& line : lines) {
      auto [it, inserted] =
          ids.try_emplace(line, static_cast<std::uint32_t>(ids.size()));
      seq.push_back(it->second);
    }
    return seq;
  };
  const Seq a = intern(pre);
  const Seq b = intern(post);

  std::vector<RawHunk> hunks;
  for (const auto& e : HistogramDiffer(a, b).run()) {
    hunks.push_back({e.a_begin, e.a_end - e.a_begin, e.b_begin, e.b_end - e.b_begin});
  }
  return hunks;
}

std::vector<std::pair<std::size_t, std::size_t>> unchanged_pairs(
    const std::vector<RawHunk>& hunks, std::size_t pre_size,
    std::size_t post_size) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t a = 0, b = 0;
  for (const auto& h : hunks) {
    while (a < h.del_start) pairs.emplace_back(a++, b++);
    a += h.del_count;
    b += h.add_count;
  }
  while (a < pre_size && b < post_size) pairs.emplace_back(a++, b++);
  return pairs;
}

}  // namespace patchloom::repo
