#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "todopatch/common.hpp"

namespace todopatch::extract {

enum class GrammarId { Python };

// Tabs expanded to 4 spaces, trailing whitespace stripped, CRLF/CR folded to
// LF. Line count is preserved, so diff line numbers stay valid.
std::string normalize_source(std::string_view text);

// Per-physical-line classification produced by the string/comment scanner.
// String literal bodies count as code; only comments are carved out.
struct LineInfo {
  std::string code_text;              // comment removed, right-trimmed
  std::optional<std::string> comment; // text after '#', trimmed
  bool has_code = false;
  bool statement_start = false;  // not a continuation (string/bracket/backslash)
  int indent = 0;                // leading spaces; meaningful on content lines
  bool blank() const { return !has_code && !comment; }
};

struct ScanResult {
  std::vector<LineInfo> lines;
  // First offending 1-based line for each recoverable scan defect, or 0.
  int unterminated_string_line = 0;
  int newline_in_string_line = 0;
  int unbalanced_bracket_line = 0;
};

ScanResult scan_lines(std::string_view normalized_text);

struct MethodRecord {
  std::string project;
  std::string file;
  std::string commit;
  std::string qualified_name;  // enclosing classes/functions joined with '.'
  int start_line = 0;          // 1-based, inclusive; the def header line
  int end_line = 0;            // last non-blank body line
  std::vector<std::string> source_lines;  // raw normalized lines of the span
  bool contains_async = false;
};

// Every def / async def (including nested and class methods) in the file.
// Throws ParseFailure on files the grammar rejects; callers apply Rule 3.
std::vector<MethodRecord> parse_methods(std::string_view normalized_text,
                                        GrammarId grammar,
                                        const std::string& file_for_errors = "");

struct TodoInstance {
  std::string comment_text;  // comment with '#' stripped; continuation
                             // comment-only lines joined by single spaces
  std::string file;
  int line = 0;  // 1-based line of the marker
  std::string commit_hash;
  std::optional<std::size_t> method_index;  // into the methods vector
  bool file_parse_failed = false;
};

// Binds each marker-bearing comment line to the innermost covering method.
// Diff lines whose marker does not fall inside a comment (e.g. a "TODO"
// inside a string literal) are dropped; `non_comment_dropped` counts them.
std::vector<TodoInstance> locate_todos(
    const std::vector<MethodRecord>& methods, const ScanResult& scan,
    const std::vector<std::pair<int, std::string>>& todo_lines,
    std::string_view marker, const std::string& file,
    const std::string& commit_hash, int* non_comment_dropped = nullptr);

struct RuleCounts {
  // An instance failing several rules is tallied under each of them, which
  // keeps the counts independent of evaluation order.
  int rule1_short_comment = 0;
  int rule2_outside_method = 0;
  int rule3_parse_failure = 0;
  int kept = 0;
};

// Rule 1: fewer than 3 whitespace-delimited words (marker word included).
// Rule 2: not located within a method.
// Rule 3: the file failed to parse.
std::pair<std::vector<TodoInstance>, RuleCounts> apply_filter_rules(
    const std::vector<TodoInstance>& instances);

// --- helpers over a method's own lines -------------------------------------

struct CodeLine {
  int line = 0;      // absolute 1-based line number in the file
  std::string text;  // comment-stripped, trimmed
};

// The method's non-blank, non-comment-only lines in order. Lines listed in
// `excluded_lines` (e.g. a TODO comment's own line) are omitted.
std::vector<CodeLine> method_code_lines(const MethodRecord& method,
                                        const std::vector<int>& excluded_lines = {});

// True when any comment inside the method contains `marker`.
bool method_contains_marker(const MethodRecord& method, std::string_view marker);

}  // namespace todopatch::extract
