#include "gridstore/text_format.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace gridstore {
namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw std::invalid_argument("line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r' ||
                               line[i] == ',')) {
      ++i;
    }
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' &&
           line[j] != ',') {
      ++j;
    }
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

int to_int(std::string_view tok, int line) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    fail(line, "expected an integer, got '" + std::string(tok) + "'");
  }
  return value;
}

Cell to_cell(std::string_view tok, int line) {
  const auto colon = tok.find(':');
  if (colon == std::string_view::npos) fail(line, "expected row:col, got '" + std::string(tok) + "'");
  return Cell{to_int(tok.substr(0, colon), line), to_int(tok.substr(colon + 1), line)};
}

// Calls fn(line_number, tokens) for each non-blank, non-comment line.
template <typename Fn>
void for_each_record(std::string_view text, Fn&& fn) {
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto toks = tokens(line);
    if (!toks.empty()) fn(line_no, toks);
    pos = end + 1;
  }
}

}  // namespace

std::string format_cell(Cell cell) {
  return std::to_string(cell.row) + ":" + std::to_string(cell.col);
}

std::string format_action(const Action& action) {
  std::string out(to_string(action.kind));
  out += ' ';
  out += std::to_string(action.load);
  for (Cell c : action.path.cells) {
    out += ' ';
    out += format_cell(c);
  }
  return out;
}

std::string format_actions(std::span<const Action> log) {
  std::string out;
  for (const Action& a : log) {
    out += format_action(a);
    out += '\n';
  }
  return out;
}

std::vector<Action> parse_actions(std::string_view text) {
  std::vector<Action> out;
  for_each_record(text, [&](int line, const std::vector<std::string_view>& toks) {
    if (toks.size() < 3) fail(line, "action needs a kind, a load and at least one cell");
    Action a;
    if (toks[0] == "store") {
      a.kind = ActionKind::Store;
    } else if (toks[0] == "retrieve") {
      a.kind = ActionKind::Retrieve;
    } else if (toks[0] == "relocate") {
      a.kind = ActionKind::Relocate;
    } else {
      fail(line, "unknown action kind '" + std::string(toks[0]) + "'");
    }
    a.load = to_int(toks[1], line);
    for (std::size_t i = 2; i < toks.size(); ++i) a.path.cells.push_back(to_cell(toks[i], line));
    out.push_back(std::move(a));
  });
  return out;
}

std::string format_arrangement(const Arrangement& arr) {
  std::ostringstream os;
  os << "grid " << arr.spec().rows() << ' ' << arr.spec().cols() << ' ' << arr.num_loads()
     << '\n';
  for (Load l : arr.loads()) os << "place " << l << ' ' << format_cell(*arr.position(l)) << '\n';
  return os.str();
}

Arrangement parse_arrangement(std::string_view text) {
  std::optional<Arrangement> arr;
  for_each_record(text, [&](int line, const std::vector<std::string_view>& toks) {
    if (toks[0] == "grid") {
      if (arr) fail(line, "duplicate grid header");
      if (toks.size() != 4) fail(line, "expected: grid <rows> <cols> <loads>");
      try {
        arr.emplace(GridSpec(to_int(toks[1], line), to_int(toks[2], line)),
                    to_int(toks[3], line));
      } catch (const std::invalid_argument& e) {
        fail(line, e.what());
      }
    } else if (toks[0] == "place") {
      if (!arr) fail(line, "place before grid header");
      if (toks.size() != 3) fail(line, "expected: place <load> <row>:<col>");
      try {
        arr->place(to_int(toks[1], line), to_cell(toks[2], line));
      } catch (const std::invalid_argument& e) {
        fail(line, e.what());
      }
    } else {
      fail(line, "unknown record '" + std::string(toks[0]) + "'");
    }
  });
  if (!arr) throw std::invalid_argument("missing grid header");
  return std::move(*arr);
}

std::string format_sequence(std::span<const Load> seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(seq[i]);
  }
  return out;
}

Sequence parse_sequence(std::string_view text) {
  Sequence out;
  for_each_record(text, [&](int line, const std::vector<std::string_view>& toks) {
    for (auto t : toks) out.push_back(to_int(t, line));
  });
  return out;
}

std::string render(const Arrangement& arr) {
  const GridSpec& spec = arr.spec();
  const int width = static_cast<int>(std::to_string(arr.num_loads()).size());
  std::ostringstream os;
  for (int row = spec.rows(); row >= 1; --row) {
    for (int col = 1; col <= spec.cols(); ++col) {
      const Load l = arr.at(Cell{row, col});
      std::string s = l == kNoLoad ? "." : std::to_string(l);
      if (col > 1) os << ' ';
      os << std::string(static_cast<std::size_t>(width) - s.size(), ' ') << s;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace gridstore
