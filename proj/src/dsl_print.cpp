#include <set>
#include <sstream>
#include <utility>

#include "tmkit/dsl.hpp"

namespace tmkit {

std::string quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  out += '"';
  return out;
}

namespace {

using ArcKey = std::pair<std::string, std::string>;

class Printer {
 public:
  explicit Printer(const SModel& m) : m_(m) {
    for (const FlowArc& arc : m.flows()) {
      if (!arc.annotation) chainable_.insert({arc.src, arc.dst});
    }
  }

  std::string run() {
    out_ << "model " << m_.name() << '\n';
    print_thimac(m_.root(), 0);
    for (const FlowArc& arc : m_.flows()) {
      if (consumed_.contains({arc.src, arc.dst})) continue;
      out_ << "flow " << arc.src << " -> " << arc.dst;
      if (arc.annotation) out_ << ' ' << quote(*arc.annotation);
      out_ << '\n';
    }
    for (const TriggerArc& arc : m_.triggers()) {
      out_ << "trigger " << arc.src << " -> " << arc.dst << '\n';
    }
    return out_.str();
  }

 private:
  void print_thimac(const Thimac& thimac, int depth) {
    std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    out_ << pad << "thimac " << thimac.segment();
    if (thimac.label != thimac.segment()) out_ << ' ' << quote(thimac.label);
    out_ << " {\n";
    if (thimac.time) {
      out_ << pad << "  time " << thimac.time->tick;
      if (thimac.time->wall_label) out_ << ' ' << quote(*thimac.time->wall_label);
      out_ << '\n';
    }

    const auto& stages = thimac.stages;
    std::size_t begin = 0;
    while (begin < stages.size()) {
      std::size_t end = begin + 1;
      while (end < stages.size() && joins(stages[end - 1], stages[end])) {
        consumed_.insert({stages[end - 1].id, stages[end].id});
        ++end;
      }
      out_ << pad << "  path "
           << format_flow_string(std::span(stages).subspan(begin, end - begin))
           << '\n';
      begin = end;
    }

    for (const Thimac& child : thimac.subthimacs) print_thimac(child, depth + 1);
    out_ << pad << "}\n";
  }

  // Consecutive stages print as one path when an unannotated arc joins them
  // and the spelling re-parses to the same two stages.
  bool joins(const Stage& a, const Stage& b) const {
    if (!chainable_.contains({a.id, b.id})) return false;
    bool merges_on_reparse = a.kind == StageKind::receive &&
                             b.kind == StageKind::arrive && !b.expanded_receive;
    return !merges_on_reparse;
  }

  const SModel& m_;
  std::ostringstream out_;
  std::set<ArcKey> chainable_;
  std::set<ArcKey> consumed_;
};

}  // namespace

std::string print_model(const SModel& m) { return Printer(m).run(); }

}  // namespace tmkit
