#include "todopatch/gitmine.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace todopatch::mine {
namespace {

using nlohmann::json;

// Unescapes a C-style quoted path as emitted by git for names with special
// characters. Plain paths pass through untouched.
std::string unquote_path(std::string_view raw) {
  if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') {
    return std::string(raw);
  }
  std::string out;
  const std::size_t end = raw.size() - 1;  // skip closing quote
  for (std::size_t i = 1; i < end; ++i) {
    char c = raw[i];
    if (c != '\\' || i + 1 >= end) {
      out.push_back(c);
      continue;
    }
    char e = raw[++i];
    switch (e) {
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case '\\': out.push_back('\\'); break;
      case '"': out.push_back('"'); break;
      default:
        if (e >= '0' && e <= '7' && i + 2 < end) {
          int v = (e - '0') * 64 + (raw[i + 1] - '0') * 8 + (raw[i + 2] - '0');
          out.push_back(static_cast<char>(v));
          i += 2;
        } else {
          out.push_back(e);
        }
    }
  }
  return out;
}

// Parses "@@ -a[,b] +c[,d] @@"; returns {old_start, old_count, new_start,
// new_count} or nullopt when the line is not a hunk header.
struct HunkHeader {
  long old_start, old_count, new_start, new_count;
};

std::optional<HunkHeader> parse_hunk_header(std::string_view line) {
  if (line.substr(0, 4) != "@@ -") return std::nullopt;
  HunkHeader h{0, 1, 0, 1};
  std::size_t i = 4;
  auto read_num = [&](long& out) {
    long v = 0;
    bool any = false;
    while (i < line.size() && line[i] >= '0' && line[i] <= '9') {
      v = v * 10 + (line[i] - '0');
      ++i;
      any = true;
    }
    out = v;
    return any;
  };
  if (!read_num(h.old_start)) return std::nullopt;
  if (i < line.size() && line[i] == ',') {
    ++i;
    if (!read_num(h.old_count)) return std::nullopt;
  }
  if (i + 1 >= line.size() || line[i] != ' ' || line[i + 1] != '+') {
    return std::nullopt;
  }
  i += 2;
  if (!read_num(h.new_start)) return std::nullopt;
  if (i < line.size() && line[i] == ',') {
    ++i;
    if (!read_num(h.new_count)) return std::nullopt;
  }
  return h;
}

// Parses `git diff-tree -p -U0` output into per-file added/removed lines.
// Binary files and oversized files are dropped, with a note in `warnings`.
std::vector<FileDiff> parse_patch(const std::string& patch,
                                  const MinerOptions& options,
                                  const std::string& commit_hash,
                                  std::vector<std::string>* warnings) {
  std::vector<FileDiff> diffs;
  FileDiff current;
  bool in_file = false;
  bool skip_file = false;
  std::size_t file_bytes = 0;
  long next_added = 0;
  long next_removed = 0;

  auto flush = [&] {
    if (in_file && !skip_file &&
        (!current.added_lines.empty() || !current.removed_lines.empty())) {
      diffs.push_back(std::move(current));
    }
    current = FileDiff{};
    in_file = false;
    skip_file = false;
    file_bytes = 0;
  };
  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(commit_hash + ": " + msg);
  };

  std::istringstream in(patch);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("diff --git ", 0) == 0) {
      flush();
      in_file = true;
      continue;
    }
    if (!in_file) continue;
    if (line.rfind("Binary files ", 0) == 0 ||
        line.rfind("GIT binary patch", 0) == 0) {
      warn("binary file skipped");
      skip_file = true;
      continue;
    }
    if (line.rfind("+++ ", 0) == 0) {
      std::string_view target(line);
      target.remove_prefix(4);
      if (target != "/dev/null") {
        std::string p = unquote_path(target);
        if (p.rfind("b/", 0) == 0) p = p.substr(2);
        current.path = p;
      }
      continue;
    }
    if (line.rfind("--- ", 0) == 0) {
      std::string_view source(line);
      source.remove_prefix(4);
      if (source != "/dev/null" && current.path.empty()) {
        std::string p = unquote_path(source);
        if (p.rfind("a/", 0) == 0) p = p.substr(2);
        current.path = p;  // deletions keep the pre-image path
      }
      continue;
    }
    if (auto h = parse_hunk_header(line)) {
      next_added = h->new_start;
      next_removed = h->old_start;
      continue;
    }
    if (skip_file || line.empty()) continue;
    switch (line[0]) {
      case '+': {
        file_bytes += line.size();
        if (file_bytes > options.max_file_bytes) {
          warn("oversized diff for " + current.path + " skipped");
          skip_file = true;
          current.added_lines.clear();
          current.removed_lines.clear();
          break;
        }
        current.added_lines.push_back(
            {static_cast<int>(next_added++), line.substr(1)});
        break;
      }
      case '-':
        file_bytes += line.size();
        current.removed_lines.push_back(
            {static_cast<int>(next_removed++), line.substr(1)});
        break;
      default:
        break;  // context lines (none with -U0), "\ No newline" markers
    }
  }
  flush();
  return diffs;
}

}  // namespace

std::string run_git(const std::filesystem::path& repo_path,
                    const std::vector<std::string>& args) {
  std::vector<std::string> argv = {"git", "-C", repo_path.string(), "-c",
                                   "core.quotepath=false"};
  argv.insert(argv.end(), args.begin(), args.end());
  ProcessResult r = run_process(argv);
  if (!r.ok()) {
    throw Error("git " + (args.empty() ? std::string() : args[0]) +
                " failed (" + std::to_string(r.exit_code) + "): " + trim(r.err));
  }
  return r.out;
}

std::vector<CommitRecord> walk_commits(const std::filesystem::path& repo_path,
                                       const MinerOptions& options,
                                       std::vector<std::string>* warnings) {
  std::string rev_list;
  try {
    rev_list = run_git(repo_path,
                       {"rev-list", "--topo-order", "--reverse", "--parents",
                        "HEAD"});
  } catch (const Error& e) {
    throw NotARepository(repo_path.string() + ": " + e.what());
  }

  std::string repo_id = repo_path.filename().string();
  if (repo_id.empty()) repo_id = repo_path.parent_path().filename().string();

  std::vector<CommitRecord> commits;
  std::size_t failed = 0;
  std::size_t considered = 0;
  for (const std::string& entry : split_lines(rev_list)) {
    std::vector<std::string> hashes = split_ws(entry);
    if (hashes.empty()) continue;
    if (hashes.size() > 2) continue;  // merge commit: two or more parents
    ++considered;
    CommitRecord rec;
    rec.repo_id = repo_id;
    rec.commit_hash = hashes[0];
    if (hashes.size() == 2) rec.parent_hash = hashes[1];
    try {
      std::string patch =
          run_git(repo_path, {"diff-tree", "--root", "--no-commit-id",
                              "--no-renames", "-p", "-U0", rec.commit_hash});
      rec.diffs = parse_patch(patch, options, rec.commit_hash, warnings);
    } catch (const Error& e) {
      ++failed;
      if (warnings) {
        warnings->push_back("skipping unreadable commit " + rec.commit_hash +
                            ": " + e.what());
      }
      continue;
    }
    commits.push_back(std::move(rec));
  }
  if (considered == 0) {
    throw NotARepository(repo_path.string() + ": no commits");
  }
  if (commits.empty() && failed > 0) {
    throw CorruptHistory(repo_path.string() + ": no readable commits");
  }
  return commits;
}

std::vector<TodoCommit> identify_todo_commits(
    const std::vector<CommitRecord>& commits, std::string_view marker) {
  if (marker.empty()) throw Error("marker must be non-empty");
  std::vector<TodoCommit> result;
  for (const CommitRecord& commit : commits) {
    TodoCommit tc;
    for (const FileDiff& diff : commit.diffs) {
      for (const DiffLine& added : diff.added_lines) {
        if (added.text.find(marker) != std::string::npos) {
          tc.todo_lines.push_back({diff.path, added.line, added.text});
        }
      }
    }
    if (!tc.todo_lines.empty()) {
      std::sort(tc.todo_lines.begin(), tc.todo_lines.end(),
                [](const TodoLine& a, const TodoLine& b) {
                  return std::tie(a.path, a.line) < std::tie(b.path, b.line);
                });
      tc.commit = commit;
      result.push_back(std::move(tc));
    }
  }
  return result;
}

std::optional<TodoCommit> filter_source_files(
    const TodoCommit& tc, const std::set<std::string>& extensions) {
  if (extensions.empty()) throw Error("extensions must be non-empty");
  TodoCommit out;
  out.commit = tc.commit;
  for (const TodoLine& line : tc.todo_lines) {
    for (const std::string& ext : extensions) {
      if (ends_with(line.path, ext)) {
        out.todo_lines.push_back(line);
        break;
      }
    }
  }
  if (out.todo_lines.empty()) return std::nullopt;
  return out;
}

void write_todo_commits_jsonl(std::ostream& out,
                              const std::vector<TodoCommit>& commits) {
  for (const TodoCommit& tc : commits) {
    json todos = json::array();
    for (const TodoLine& line : tc.todo_lines) {
      todos.push_back({{"path", line.path}, {"line", line.line},
                       {"text", line.text}});
    }
    json record = {{"repo", tc.commit.repo_id},
                   {"hash", tc.commit.commit_hash},
                   {"todos", std::move(todos)}};
    out << record.dump() << '\n';
  }
}

std::vector<TodoCommit> read_todo_commits_jsonl(std::istream& in) {
  std::vector<TodoCommit> commits;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
      TodoCommit tc;
      tc.commit.repo_id = record.at("repo").get<std::string>();
      tc.commit.commit_hash = record.at("hash").get<std::string>();
      for (const json& t : record.at("todos")) {
        tc.todo_lines.push_back({t.at("path").get<std::string>(),
                                 t.at("line").get<int>(),
                                 t.at("text").get<std::string>()});
      }
      commits.push_back(std::move(tc));
    } catch (const json::exception& e) {
      throw MalformedRecord(line_no, e.what());
    }
  }
  return commits;
}

std::string read_file_at_commit(const std::filesystem::path& repo_path,
                                const std::string& commit_hash,
                                const std::string& path,
                                std::size_t max_bytes) {
  std::string spec = commit_hash + ":" + path;
  std::string size_str = trim(run_git(repo_path, {"cat-file", "-s", spec}));
  std::size_t size = std::stoull(size_str);
  if (size > max_bytes) {
    throw Error(spec + ": blob of " + size_str + " bytes exceeds cap");
  }
  return run_git(repo_path, {"show", spec});
}

}  // namespace todopatch::mine
