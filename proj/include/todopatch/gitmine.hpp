#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "todopatch/common.hpp"

namespace todopatch::mine {

struct DiffLine {
  int line = 0;  // 1-based; post-image for additions, pre-image for removals
  std::string text;
};

struct FileDiff {
  std::string path;  // repository-relative
  std::vector<DiffLine> added_lines;
  std::vector<DiffLine> removed_lines;
};

struct CommitRecord {
  std::string repo_id;
  std::string commit_hash;  // 40 lowercase hex chars
  std::optional<std::string> parent_hash;
  std::vector<FileDiff> diffs;
};

struct TodoLine {
  std::string path;
  int line = 0;
  std::string text;
};

struct TodoCommit {
  CommitRecord commit;
  std::vector<TodoLine> todo_lines;
};

struct MinerOptions {
  // Files whose blob exceeds this are skipped with a warning, as are files
  // git reports as binary.
  std::size_t max_file_bytes = 1 << 20;
};

// Walks every non-merge commit of the repository at HEAD, oldest first, each
// diffed against its first parent (the root commit against the empty tree).
// Unreadable commits are skipped and reported through `warnings`; the walk
// fails with CorruptHistory only when no commit could be read at all.
std::vector<CommitRecord> walk_commits(const std::filesystem::path& repo_path,
                                       const MinerOptions& options = {},
                                       std::vector<std::string>* warnings = nullptr);

// Keeps exactly the commits where `marker` occurs as a substring of at least
// one added line; todo_lines lists every matching added line.
std::vector<TodoCommit> identify_todo_commits(
    const std::vector<CommitRecord>& commits, std::string_view marker);

// Restricts todo_lines to paths ending in one of `extensions` (e.g. ".py").
// Returns nullopt when nothing remains.
std::optional<TodoCommit> filter_source_files(
    const TodoCommit& tc, const std::set<std::string>& extensions);

// JSONL schema: {"repo": ..., "hash": ..., "todos": [{"path","line","text"}]}
void write_todo_commits_jsonl(std::ostream& out,
                              const std::vector<TodoCommit>& commits);
std::vector<TodoCommit> read_todo_commits_jsonl(std::istream& in);

// Content of `path` as of `commit_hash`. Throws Error when the blob is
// missing or exceeds max_bytes.
std::string read_file_at_commit(const std::filesystem::path& repo_path,
                                const std::string& commit_hash,
                                const std::string& path,
                                std::size_t max_bytes = 1 << 20);

// Runs git with -C <repo> and returns stdout; throws Error on failure.
std::string run_git(const std::filesystem::path& repo_path,
                    const std::vector<std::string>& args);

}  // namespace todopatch::mine
