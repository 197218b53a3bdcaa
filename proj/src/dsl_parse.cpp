#include <algorithm>
#include <charconv>
#include <set>
#include <utility>

#include "tmkit/dsl.hpp"
#include "tmkit/error.hpp"

namespace tmkit {

namespace {

enum class Tok { word, string, lbrace, rbrace, arrow, newline, end };

struct Token {
  Tok type = Tok::end;
  std::string text;
  SourcePosition pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (at_ < src_.size()) {
      char c = src_[at_];
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '#') {
        while (at_ < src_.size() && src_[at_] != '\n') advance();
      } else {
        break;
      }
    }
    Token tok;
    tok.pos = {line_, column_};
    if (at_ >= src_.size()) return tok;

    char c = src_[at_];
    if (c == '\n') {
      advance();
      tok.type = Tok::newline;
    } else if (c == '{') {
      advance();
      tok.type = Tok::lbrace;
    } else if (c == '}') {
      advance();
      tok.type = Tok::rbrace;
    } else if (c == '"') {
      tok.type = Tok::string;
      tok.text = read_string(tok.pos);
    } else if (src_.substr(at_, 2) == "->") {
      advance();
      advance();
      tok.type = Tok::arrow;
    } else {
      tok.type = Tok::word;
      while (at_ < src_.size()) {
        char w = src_[at_];
        if (w == ' ' || w == '\t' || w == '\r' || w == '\n' || w == '{' ||
            w == '}' || w == '"') {
          break;
        }
        tok.text += w;
        advance();
      }
    }
    return tok;
  }

 private:
  void advance() {
    if (src_[at_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++at_;
  }

  std::string read_string(SourcePosition start) {
    advance();  // opening quote
    std::string out;
    while (true) {
      if (at_ >= src_.size() || src_[at_] == '\n') {
        throw Error(ErrorCode::Syntax, "unterminated string", start);
      }
      char c = src_[at_];
      advance();
      if (c == '"') return out;
      if (c == '\\') {
        if (at_ >= src_.size()) {
          throw Error(ErrorCode::Syntax, "unterminated string", start);
        }
        char e = src_[at_];
        advance();
        if (e == 'n') {
          out += '\n';
        } else if (e == '"' || e == '\\') {
          out += e;
        } else {
          throw Error(ErrorCode::Syntax,
                      std::string("unknown escape '\\") + e + "'", start);
        }
      } else {
        out += c;
      }
    }
  }

  std::string_view src_;
  std::size_t at_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

struct PendingArc {
  std::string src;
  std::string dst;
  std::optional<std::string> annotation;
  SourcePosition src_pos;
  SourcePosition dst_pos;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { bump(); }

  SModel parse() {
    skip_newlines();
    if (tok_.type == Tok::end) {
      throw Error(ErrorCode::EmptyModel, "model file is empty", tok_.pos);
    }
    if (tok_.type != Tok::word || tok_.text != "model") {
      fail("expected 'model <name>' header");
    }
    bump();
    std::string name = expect_word("model name");
    if (!is_identifier(name)) fail_at(last_pos_, "model name must be an identifier");
    end_of_statement();

    std::optional<Thimac> root;
    while (true) {
      skip_newlines();
      if (tok_.type == Tok::end) break;
      if (tok_.type == Tok::rbrace) fail("unbalanced '}'");
      if (tok_.type != Tok::word) fail("expected a statement");
      if (tok_.text == "thimac") {
        if (root) fail("a model has exactly one root thimac");
        root = parse_thimac({});
      } else if (tok_.text == "flow" || tok_.text == "trigger") {
        parse_arc();
      } else {
        fail("unexpected '" + tok_.text + "' at model level");
      }
    }
    if (!root) {
      throw Error(ErrorCode::EmptyModel, "model '" + name + "' has no thimac",
                  tok_.pos);
    }
    resolve_arcs();

    std::vector<FlowArc> flows;
    for (auto& arc : flows_) {
      flows.push_back({std::move(arc.src), std::move(arc.dst),
                       std::move(arc.annotation)});
    }
    std::vector<TriggerArc> triggers;
    for (auto& arc : triggers_) {
      triggers.push_back({std::move(arc.src), std::move(arc.dst)});
    }
    return build_model(std::move(name), std::move(*root), std::move(flows),
                       std::move(triggers));
  }

 private:
  Thimac parse_thimac(const std::string& parent) {
    SourcePosition opened = tok_.pos;
    bump();  // thimac
    std::string segment = expect_word("thimac name");
    if (!is_identifier(segment)) {
      fail_at(last_pos_, "thimac name '" + segment + "' is not an identifier");
    }
    Thimac thimac;
    thimac.id = parent.empty() ? segment : child_id(parent, segment);
    if (!thimac_ids_.insert(thimac.id).second) {
      throw Error(ErrorCode::DuplicateId,
                  "duplicate thimac id '" + thimac.id + "'", last_pos_);
    }
    if (tok_.type == Tok::string) {
      thimac.label = tok_.text;
      bump();
    }
    if (tok_.type != Tok::lbrace) fail("expected '{'");
    bump();
    end_of_statement();

    std::vector<StageKind> kinds;
    while (true) {
      skip_newlines();
      if (tok_.type == Tok::end) {
        throw Error(ErrorCode::Syntax,
                    "thimac '" + thimac.id + "' is never closed", opened);
      }
      if (tok_.type == Tok::rbrace) {
        bump();
        end_of_statement();
        break;
      }
      if (tok_.type != Tok::word) fail("expected a statement");
      const std::string keyword = tok_.text;
      if (keyword == "thimac") {
        thimac.subthimacs.push_back(parse_thimac(thimac.id));
      } else if (keyword == "stage") {
        bump();
        SourcePosition at = tok_.pos;
        std::string text = expect_word("stage kind");
        auto kind = stage_kind_from_string(text);
        if (!kind) fail_at(at, "unknown stage kind '" + text + "'");
        Stage stage;
        stage.kind = *kind;
        stage_ids_.insert(stage_ref(
            thimac.id, *kind,
            static_cast<std::size_t>(std::ranges::count(kinds, *kind))));
        thimac.stages.push_back(stage);
        kinds.push_back(*kind);
        end_of_statement();
      } else if (keyword == "path") {
        bump();
        SourcePosition at = tok_.pos;
        std::string text = expect_word("flow string");
        FlowPath path;
        try {
          path = parse_flow_string(text, thimac.id, kinds);
        } catch (const Error& e) {
          throw Error(e.code(), e.what(), at);
        }
        for (Stage& stage : path.stages) {
          kinds.push_back(stage.kind);
          stage_ids_.insert(stage.id);
          thimac.stages.push_back(std::move(stage));
        }
        for (FlowArc& arc : path.arcs) {
          flows_.push_back({std::move(arc.src), std::move(arc.dst),
                            std::nullopt, at, at});
        }
        end_of_statement();
      } else if (keyword == "flow" || keyword == "trigger") {
        parse_arc();
      } else if (keyword == "time") {
        if (thimac.time) fail("thimac '" + thimac.id + "' already has a time");
        bump();
        SourcePosition at = tok_.pos;
        std::string text = expect_word("tick");
        TimeTag time;
        auto [ptr, ec] =
            std::from_chars(text.data(), text.data() + text.size(), time.tick);
        if (ec != std::errc() || ptr != text.data() + text.size()) {
          fail_at(at, "tick must be a non-negative integer");
        }
        if (tok_.type == Tok::string) {
          time.wall_label = tok_.text;
          bump();
        }
        thimac.time = std::move(time);
        end_of_statement();
      } else {
        fail("unexpected '" + keyword + "' inside thimac '" + thimac.id + "'");
      }
    }
    return thimac;
  }

  void parse_arc() {
    bool is_flow = tok_.text == "flow";
    bump();
    PendingArc arc;
    arc.src_pos = tok_.pos;
    arc.src = parse_ref();
    if (tok_.type != Tok::arrow) fail("expected '->'");
    bump();
    arc.dst_pos = tok_.pos;
    arc.dst = parse_ref();
    if (tok_.type == Tok::string) {
      if (!is_flow) fail("triggers carry no annotation");
      arc.annotation = tok_.text;
      bump();
    }
    end_of_statement();
    (is_flow ? flows_ : triggers_).push_back(std::move(arc));
  }

  std::string parse_ref() {
    SourcePosition at = tok_.pos;
    std::string text = expect_word("stage reference");
    try {
      return parse_stage_ref(text);
    } catch (const Error& e) {
      fail_at(at, e.what());
    }
  }

  void resolve_arcs() {
    // Stage ids are only known once every block has been read.
    auto check = [&](std::vector<PendingArc>& arcs, std::string_view what) {
      std::set<std::pair<std::string, std::string>> seen;
      for (const PendingArc& arc : arcs) {
        if (!stage_exists(arc.src)) {
          throw Error(ErrorCode::DanglingReference,
                      std::string(what) + " endpoint '" + arc.src + "' not found",
                      arc.src_pos);
        }
        if (!stage_exists(arc.dst)) {
          throw Error(ErrorCode::DanglingReference,
                      std::string(what) + " endpoint '" + arc.dst + "' not found",
                      arc.dst_pos);
        }
        if (!seen.emplace(arc.src, arc.dst).second) {
          throw Error(ErrorCode::DuplicateArc,
                      "duplicate " + std::string(what) + " " + arc.src + " -> " +
                          arc.dst,
                      arc.src_pos);
        }
      }
    };
    check(flows_, "flow");
    check(triggers_, "trigger");
  }

  bool stage_exists(const std::string& id) const {
    return stage_ids_.contains(id);
  }

  void bump() {
    last_pos_ = tok_.pos;
    tok_ = lexer_.next();
  }

  void skip_newlines() {
    while (tok_.type == Tok::newline) bump();
  }

  void end_of_statement() {
    if (tok_.type == Tok::newline) {
      bump();
    } else if (tok_.type != Tok::end) {
      fail("expected end of line");
    }
  }

  std::string expect_word(std::string_view what) {
    if (tok_.type != Tok::word) fail("expected " + std::string(what));
    std::string text = tok_.text;
    bump();
    return text;
  }

  [[noreturn]] void fail(const std::string& message) const {
    fail_at(tok_.pos, message);
  }

  [[noreturn]] static void fail_at(SourcePosition at, const std::string& message) {
    throw Error(ErrorCode::Syntax, message, at);
  }

  Lexer lexer_;
  Token tok_;
  SourcePosition last_pos_;
  std::set<std::string> thimac_ids_;
  std::set<std::string> stage_ids_;
  std::vector<PendingArc> flows_;
  std::vector<PendingArc> triggers_;
};

}  // namespace

std::string parse_stage_ref(std::string_view text) {
  auto bad = [&](const std::string& why) -> Error {
    return Error(ErrorCode::Syntax, why);
  };
  auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw bad("stage reference '" + std::string(text) + "' lacks ':<kind>'");
  }
  std::string_view thimac = text.substr(0, colon);
  std::string_view rest = text.substr(colon + 1);
  std::size_t ordinal = 0;
  if (auto hash = rest.find('#'); hash != std::string_view::npos) {
    std::string_view digits = rest.substr(hash + 1);
    auto [ptr, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), ordinal);
    if (digits.empty() || ec != std::errc() ||
        ptr != digits.data() + digits.size()) {
      throw bad("bad stage ordinal in '" + std::string(text) + "'");
    }
    rest = rest.substr(0, hash);
  }
  auto kind = stage_kind_from_string(rest);
  if (!kind) {
    throw bad("unknown stage kind '" + std::string(rest) + "' in '" +
              std::string(text) + "'");
  }
  return stage_ref(thimac, *kind, ordinal);
}

SModel parse_model(std::string_view source) { return Parser(source).parse(); }

}  // namespace tmkit
