#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "simart/error.hpp"
#include "simart/subdivision.hpp"

namespace simart {

namespace {

void append_double(std::string& out, double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  out.append(buf, res.ptr);
}

void append_u64(std::string& out, std::uint64_t x) {
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  out.append(buf, res.ptr);
}

const char* kind_name(SubdivisionKind k) {
  switch (k) {
    case SubdivisionKind::percolation: return "percolation";
    case SubdivisionKind::cascade: return "cascade";
    case SubdivisionKind::salem_line: return "salem_line";
  }
  return "percolation";
}

SubdivisionKind kind_from_name(std::string_view name) {
  if (name == "percolation") return SubdivisionKind::percolation;
  if (name == "cascade") return SubdivisionKind::cascade;
  if (name == "salem_line") return SubdivisionKind::salem_line;
  fail_validation("subdivision header: unknown kind '" + std::string(name) + "'");
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find(sep, pos);
    if (next == std::string_view::npos) next = text.size();
    out.push_back(text.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

double parse_double(std::string_view token, const char* what) {
  double value = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  require(res.ec == std::errc() && res.ptr == token.data() + token.size() &&
              std::isfinite(value),
          std::string("subdivision parse: bad ") + what);
  return value;
}

std::uint64_t parse_u64(std::string_view token, const char* what) {
  std::uint64_t value = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  require(res.ec == std::errc() && res.ptr == token.data() + token.size(),
          std::string("subdivision parse: bad ") + what);
  return value;
}

}  // namespace

// One "# key value ..." header line, then one "path weight" record per
// surviving cell at levels 1..depth, level-major and index-ascending. The
// path is the cell's digit string from the root in base 2^d; the root cell
// (weight 1, empty path) is implied.
std::string SubdivisionTree::serialize() const {
  std::string out;
  out += "# subdivision d ";
  append_u64(out, static_cast<std::uint64_t>(d_));
  out += " depth ";
  append_u64(out, static_cast<std::uint64_t>(depth_));
  out += " kind ";
  out += kind_name(kind_);
  out += " param ";
  append_double(out, param_);
  out += " growth ";
  append_double(out, growth_);
  out += " alpha ";
  append_double(out, alpha_);
  out += " root ";
  append_u64(out, seed_.root);
  out += " seedpath ";
  if (seed_.path.empty()) {
    out += "-";
  } else {
    for (std::size_t i = 0; i < seed_.path.size(); ++i) {
      if (i > 0) out += ',';
      append_u64(out, seed_.path[i]);
    }
  }
  out += '\n';

  std::uint64_t mask = (std::uint64_t{1} << d_) - 1;
  for (int n = 1; n <= depth_; ++n) {
    const Level& lv = levels_[static_cast<std::size_t>(n)];
    for (std::size_t i = 0; i < lv.index.size(); ++i) {
      std::uint64_t idx = lv.index[i];
      for (int j = n - 1; j >= 0; --j) {
        std::uint64_t digit = (idx >> (d_ * j)) & mask;
        out += static_cast<char>('0' + digit);
      }
      out += ' ';
      append_double(out, lv.weight[i]);
      out += '\n';
    }
  }
  return out;
}

SubdivisionTree SubdivisionTree::deserialize(const std::string& text) {
  std::vector<std::string_view> lines = split(text, '\n');
  require(!lines.empty() && !lines[0].empty() && lines[0][0] == '#',
          "subdivision parse: missing '#' header line");

  std::vector<std::string_view> head = split(lines[0], ' ');
  // "# subdivision" + 8 "key value" pairs
  require(head.size() == 18 && head[1] == "subdivision",
          "subdivision parse: malformed header");
  auto header_field = [&](std::size_t slot, std::string_view key) {
    require(head[2 + 2 * slot] == key,
            "subdivision parse: header field order must be "
            "d/depth/kind/param/growth/alpha/root/seedpath");
    return head[3 + 2 * slot];
  };

  SubdivisionTree tree;
  std::uint64_t d_raw = parse_u64(header_field(0, "d"), "d");
  std::uint64_t depth_raw = parse_u64(header_field(1, "depth"), "depth");
  require(d_raw >= 1 && d_raw <= 3, "subdivision parse: d must be 1, 2 or 3");
  tree.d_ = static_cast<int>(d_raw);
  require(depth_raw <= 59 && static_cast<int>(d_raw * depth_raw) <= 60,
          "subdivision parse: depth too large");
  tree.depth_ = static_cast<int>(depth_raw);
  tree.kind_ = kind_from_name(header_field(2, "kind"));
  tree.param_ = parse_double(header_field(3, "param"), "param");
  tree.growth_ = parse_double(header_field(4, "growth"), "growth");
  require(tree.growth_ > 0.0, "subdivision parse: growth must be positive");
  tree.alpha_ = parse_double(header_field(5, "alpha"), "alpha");
  tree.seed_.root = parse_u64(header_field(6, "root"), "root");
  std::string_view seedpath = header_field(7, "seedpath");
  if (seedpath != "-") {
    for (std::string_view part : split(seedpath, ',')) {
      tree.seed_.path.push_back(parse_u64(part, "seedpath"));
    }
  }
  if (tree.kind_ == SubdivisionKind::salem_line) {
    require(tree.d_ == 1, "subdivision parse: salem_line requires d = 1");
    tree.branching_ = SalemLineSpec::make(tree.param_, tree.depth_).branching;
  }

  tree.levels_.resize(static_cast<std::size_t>(tree.depth_) + 1);
  Level& root = tree.levels_[0];
  root.index = {0};
  root.weight = {1.0};
  root.beta = {1.0};
  root.mass = 1.0;

  int fan = 1 << tree.d_;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    std::string_view line = lines[li];
    if (line.empty()) continue;
    std::size_t sep = line.find(' ');
    require(sep != std::string_view::npos && sep > 0,
            "subdivision parse: record must be 'path weight'");
    std::string_view path = line.substr(0, sep);
    int n = static_cast<int>(path.size());
    require(n <= tree.depth_, "subdivision parse: record deeper than depth");
    std::uint64_t idx = 0;
    for (char ch : path) {
      int digit = ch - '0';
      require(digit >= 0 && digit < fan, "subdivision parse: bad path digit");
      idx = (idx << tree.d_) | static_cast<std::uint64_t>(digit);
    }
    double w = parse_double(line.substr(sep + 1), "weight");
    require(w > 0.0 && w <= tree.growth_ * (1.0 + 1e-12),
            "subdivision parse: weight outside (0, growth]");
    Level& lv = tree.levels_[static_cast<std::size_t>(n)];
    require(lv.index.empty() || lv.index.back() < idx,
            "subdivision parse: records must be level-major and index-ascending");
    lv.index.push_back(idx);
    lv.weight.push_back(w);
  }

  for (int n = 1; n <= tree.depth_; ++n) {
    const Level& prev = tree.levels_[static_cast<std::size_t>(n - 1)];
    Level& lv = tree.levels_[static_cast<std::size_t>(n)];
    lv.beta.reserve(lv.index.size());
    for (std::size_t i = 0; i < lv.index.size(); ++i) {
      std::uint64_t parent = lv.index[i] >> tree.d_;
      auto it = std::lower_bound(prev.index.begin(), prev.index.end(), parent);
      require(it != prev.index.end() && *it == parent,
              "subdivision parse: cell has no surviving parent");
      lv.beta.push_back(prev.beta[static_cast<std::size_t>(it - prev.index.begin())] *
                        lv.weight[i]);
    }
    tree.finish_level(lv, n);
  }
  return tree;
}

}  // namespace simart
