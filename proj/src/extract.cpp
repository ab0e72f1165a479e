#include "todopatch/extract.hpp"

#include <algorithm>
#include <cctype>

namespace todopatch::extract {
namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

std::string rstrip(std::string_view s) {
  std::size_t e = s.size();
  while (e > 0 && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(0, e));
}

int leading_spaces(std::string_view s) {
  int n = 0;
  while (n < static_cast<int>(s.size()) && s[n] == ' ') ++n;
  return n;
}

}  // namespace

std::string normalize_source(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::string line;
  auto flush_line = [&] {
    out += rstrip(line);
    out.push_back('\n');
    line.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
      flush_line();
    } else if (c == '\n') {
      flush_line();
    } else if (c == '\t') {
      line += "    ";
    } else {
      line.push_back(c);
    }
  }
  if (!line.empty()) flush_line();
  return out;
}

ScanResult scan_lines(std::string_view text) {
  ScanResult result;
  enum class State { Normal, Str };
  State state = State::Normal;
  char quote = 0;
  bool triple = false;
  int string_open_line = 0;
  int bracket_depth = 0;
  bool backslash_cont = false;

  std::vector<std::string> raw = split_lines(text);
  result.lines.reserve(raw.size());

  for (std::size_t li = 0; li < raw.size(); ++li) {
    const std::string& src = raw[li];
    LineInfo info;
    info.statement_start =
        state == State::Normal && bracket_depth == 0 && !backslash_cont;
    backslash_cont = false;

    std::string code;
    code.reserve(src.size());
    bool saw_comment = false;
    std::string comment;

    std::size_t i = 0;
    while (i < src.size()) {
      char c = src[i];
      if (state == State::Str) {
        code.push_back(c);
        if (c == '\\' && i + 1 < src.size()) {
          code.push_back(src[i + 1]);
          i += 2;
          continue;
        }
        if (c == quote) {
          if (!triple) {
            state = State::Normal;
          } else if (i + 2 < src.size() && src[i + 1] == quote &&
                     src[i + 2] == quote) {
            code.push_back(src[i + 1]);
            code.push_back(src[i + 2]);
            i += 2;
            state = State::Normal;
          }
        }
        ++i;
        continue;
      }
      // Normal state
      if (c == '#') {
        comment = trim(src.substr(i + 1));
        saw_comment = true;
        break;
      }
      if (c == '\'' || c == '"') {
        quote = c;
        triple = i + 2 < src.size() && src[i + 1] == c && src[i + 2] == c;
        state = State::Str;
        string_open_line = static_cast<int>(li) + 1;
        code.push_back(c);
        if (triple) {
          code.push_back(src[i + 1]);
          code.push_back(src[i + 2]);
          i += 3;
        } else {
          ++i;
        }
        continue;
      }
      if (c == '(' || c == '[' || c == '{') {
        ++bracket_depth;
      } else if (c == ')' || c == ']' || c == '}') {
        --bracket_depth;
        if (bracket_depth < 0 && result.unbalanced_bracket_line == 0) {
          result.unbalanced_bracket_line = static_cast<int>(li) + 1;
          bracket_depth = 0;
        }
      } else if (c == '\\' && i + 1 == src.size()) {
        backslash_cont = true;
        ++i;
        continue;
      }
      code.push_back(c);
      ++i;
    }

    if (state == State::Str && !triple) {
      // Single-quoted strings may not span lines; recover so that the rest of
      // the file still scans, but remember the defect for the parser.
      if (result.newline_in_string_line == 0) {
        result.newline_in_string_line = static_cast<int>(li) + 1;
      }
      state = State::Normal;
    }

    info.code_text = rstrip(code);
    info.indent = leading_spaces(info.code_text.empty() && saw_comment
                                     ? src
                                     : info.code_text);
    info.has_code = !trim(info.code_text).empty();
    if (saw_comment) info.comment = comment;
    result.lines.push_back(std::move(info));
  }

  if (state == State::Str && triple) {
    result.unterminated_string_line = string_open_line;
  }
  if (bracket_depth > 0 && result.unbalanced_bracket_line == 0) {
    result.unbalanced_bracket_line = static_cast<int>(raw.size());
  }
  return result;
}

namespace {

struct Scope {
  bool is_def = false;
  bool is_async = false;
  std::string name;
  int indent = 0;
  int header_line = 0;     // 1-based
  int last_body_line = 0;  // 1-based; last content line inside the scope
  bool body_seen = false;
};

// First ':' at bracket depth zero, or npos. Operates on comment-stripped
// code, so only string literals need skipping.
std::size_t find_block_colon(std::string_view logical) {
  int depth = 0;
  char quote = 0;
  for (std::size_t i = 0; i < logical.size(); ++i) {
    char c = logical[i];
    if (quote != 0) {
      if (c == '\\') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == '(' || c == '[' || c == '{') {
      ++depth;
    } else if (c == ')' || c == ']' || c == '}') {
      --depth;
    } else if (c == ':' && depth == 0) {
      return i;
    }
  }
  return std::string::npos;
}

struct DefHeader {
  bool is_def = false;
  bool is_class = false;
  bool is_async = false;
  std::string name;
  bool inline_body = false;
};

DefHeader match_header(std::string_view logical, const std::string& file,
                       int line) {
  DefHeader h;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < logical.size() &&
           std::isspace(static_cast<unsigned char>(logical[i])))
      ++i;
  };
  auto read_word = [&]() -> std::string {
    std::size_t b = i;
    while (i < logical.size() && is_ident_char(logical[i])) ++i;
    return std::string(logical.substr(b, i - b));
  };
  skip_ws();
  std::string word = read_word();
  if (word == "async") {
    skip_ws();
    std::string next = read_word();
    if (next != "def") return h;  // e.g. "async with"
    h.is_async = true;
    word = "def";
  }
  if (word == "def") {
    h.is_def = true;
  } else if (word == "class") {
    h.is_class = true;
  } else {
    return h;
  }
  skip_ws();
  h.name = read_word();
  if (h.name.empty()) {
    throw ParseFailure(file, line, "expected a name after 'def'/'class'");
  }
  skip_ws();
  if (h.is_def && (i >= logical.size() || logical[i] != '(')) {
    throw ParseFailure(file, line, "expected '(' in def header");
  }
  std::size_t colon = find_block_colon(logical.substr(i));
  if (colon == std::string::npos) {
    throw ParseFailure(file, line, "expected ':' to close the header");
  }
  h.inline_body = !trim(logical.substr(i + colon + 1)).empty();
  return h;
}

}  // namespace

std::vector<MethodRecord> parse_methods(std::string_view text,
                                        GrammarId grammar,
                                        const std::string& file) {
  if (grammar != GrammarId::Python) {
    throw Error("unsupported grammar");
  }
  ScanResult scan = scan_lines(text);
  if (scan.unterminated_string_line) {
    throw ParseFailure(file, scan.unterminated_string_line,
                       "unterminated triple-quoted string");
  }
  if (scan.newline_in_string_line) {
    throw ParseFailure(file, scan.newline_in_string_line,
                       "newline inside string literal");
  }
  if (scan.unbalanced_bracket_line) {
    throw ParseFailure(file, scan.unbalanced_bracket_line,
                       "unbalanced brackets");
  }

  std::vector<std::string> raw = split_lines(text);
  const auto& lines = scan.lines;
  const int n = static_cast<int>(lines.size());

  std::vector<MethodRecord> methods;
  std::vector<Scope> scopes;
  std::vector<int> indent_levels = {0};
  bool expect_indent = false;  // previous statement opened a block

  auto close_scope = [&](const Scope& s) {
    if (s.is_def) {
      if (!s.body_seen) {
        throw ParseFailure(file, s.header_line, "expected an indented block");
      }
      MethodRecord m;
      m.qualified_name.clear();
      for (const Scope& enc : scopes) {
        if (&enc == &s) break;
        m.qualified_name += enc.name + ".";
      }
      m.qualified_name += s.name;
      m.start_line = s.header_line;
      m.end_line = std::max(s.last_body_line, s.header_line);
      m.contains_async = s.is_async;
      m.source_lines.assign(raw.begin() + (m.start_line - 1),
                            raw.begin() + m.end_line);
      methods.push_back(std::move(m));
    }
  };

  int li = 0;  // 0-based physical line index
  while (li < n) {
    const LineInfo& info = lines[li];
    if (info.blank()) {
      ++li;
      continue;
    }
    if (!info.has_code) {
      // Comment-only line: never opens or closes blocks, but a comment
      // indented into a scope extends that scope's span.
      for (Scope& s : scopes) {
        if (info.indent > s.indent) s.last_body_line = li + 1;
      }
      ++li;
      continue;
    }
    if (!info.statement_start) {
      ++li;  // continuation line of an earlier statement
      continue;
    }

    const int indent = info.indent;
    // Indentation bookkeeping mirrors the tokenizer's INDENT/DEDENT rules.
    if (indent > indent_levels.back()) {
      if (!expect_indent) {
        throw ParseFailure(file, li + 1, "unexpected indent");
      }
      indent_levels.push_back(indent);
    } else {
      if (expect_indent) {
        throw ParseFailure(file, li + 1, "expected an indented block");
      }
      while (indent < indent_levels.back()) indent_levels.pop_back();
      if (indent != indent_levels.back()) {
        throw ParseFailure(file, li + 1,
                           "unindent does not match any outer indentation level");
      }
    }
    while (!scopes.empty() && indent <= scopes.back().indent) {
      close_scope(scopes.back());
      scopes.pop_back();
    }

    // Statement extent: this line plus following continuation lines.
    int last = li;
    std::string logical = lines[li].code_text;
    for (int k = li + 1; k < n && !lines[k].statement_start; ++k) {
      if (!lines[k].blank()) last = k;
      logical += "\n" + lines[k].code_text;
    }
    for (Scope& s : scopes) {
      s.last_body_line = last + 1;
      s.body_seen = true;
    }

    DefHeader header = match_header(logical, file, li + 1);
    if (header.is_def || header.is_class) {
      Scope s;
      s.is_def = header.is_def;
      s.is_async = header.is_async;
      s.name = header.name;
      s.indent = indent;
      s.header_line = li + 1;
      s.last_body_line = last + 1;
      s.body_seen = header.inline_body;
      scopes.push_back(std::move(s));
    }
    std::string trimmed = trim(logical);
    expect_indent = !trimmed.empty() && trimmed.back() == ':';
    li = last + 1;
  }
  if (expect_indent) {
    throw ParseFailure(file, n, "expected an indented block");
  }
  while (!scopes.empty()) {
    close_scope(scopes.back());
    scopes.pop_back();
  }

  std::sort(methods.begin(), methods.end(),
            [](const MethodRecord& a, const MethodRecord& b) {
              return a.start_line < b.start_line;
            });
  return methods;
}

std::vector<TodoInstance> locate_todos(
    const std::vector<MethodRecord>& methods, const ScanResult& scan,
    const std::vector<std::pair<int, std::string>>& todo_lines,
    std::string_view marker, const std::string& file,
    const std::string& commit_hash, int* non_comment_dropped) {
  std::vector<TodoInstance> out;
  for (const auto& [line, text] : todo_lines) {
    (void)text;
    const LineInfo* info =
        line >= 1 && line <= static_cast<int>(scan.lines.size())
            ? &scan.lines[line - 1]
            : nullptr;
    if (!info || !info->comment ||
        info->comment->find(marker) == std::string::npos) {
      if (non_comment_dropped) ++*non_comment_dropped;
      continue;
    }
    TodoInstance inst;
    inst.comment_text = *info->comment;
    // Comment-only lines directly below continue the comment.
    for (int k = line; k < static_cast<int>(scan.lines.size()); ++k) {
      const LineInfo& next = scan.lines[k];
      if (next.has_code || !next.comment) break;
      if (!next.comment->empty()) inst.comment_text += " " + *next.comment;
    }
    inst.file = file;
    inst.line = line;
    inst.commit_hash = commit_hash;
    // Innermost covering method: nested defs start later, so the covering
    // method with the greatest start_line is the deepest one.
    std::optional<std::size_t> best;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      const MethodRecord& m = methods[mi];
      if (m.start_line <= line && line <= m.end_line) {
        if (!best || methods[*best].start_line < m.start_line) best = mi;
      }
    }
    inst.method_index = best;
    out.push_back(std::move(inst));
  }
  return out;
}

std::pair<std::vector<TodoInstance>, RuleCounts> apply_filter_rules(
    const std::vector<TodoInstance>& instances) {
  std::vector<TodoInstance> kept;
  RuleCounts counts;
  for (const TodoInstance& inst : instances) {
    bool r1 = split_ws(inst.comment_text).size() < 3;
    bool r2 = !inst.method_index.has_value();
    bool r3 = inst.file_parse_failed;
    if (r1) ++counts.rule1_short_comment;
    if (r2) ++counts.rule2_outside_method;
    if (r3) ++counts.rule3_parse_failure;
    if (!r1 && !r2 && !r3) {
      kept.push_back(inst);
      ++counts.kept;
    }
  }
  return {std::move(kept), counts};
}

std::vector<CodeLine> method_code_lines(const MethodRecord& method,
                                        const std::vector<int>& excluded_lines) {
  std::string joined;
  for (const std::string& l : method.source_lines) {
    joined += l;
    joined.push_back('\n');
  }
  ScanResult scan = scan_lines(joined);
  std::vector<CodeLine> out;
  for (std::size_t i = 0; i < scan.lines.size(); ++i) {
    int abs_line = method.start_line + static_cast<int>(i);
    if (!scan.lines[i].has_code) continue;
    if (std::find(excluded_lines.begin(), excluded_lines.end(), abs_line) !=
        excluded_lines.end())
      continue;
    out.push_back({abs_line, trim(scan.lines[i].code_text)});
  }
  return out;
}

bool method_contains_marker(const MethodRecord& method,
                            std::string_view marker) {
  std::string joined;
  for (const std::string& l : method.source_lines) {
    joined += l;
    joined.push_back('\n');
  }
  ScanResult scan = scan_lines(joined);
  for (const LineInfo& info : scan.lines) {
    if (info.comment && info.comment->find(marker) != std::string::npos) {
      return true;
    }
  }
  return false;
}

}  // namespace todopatch::extract
