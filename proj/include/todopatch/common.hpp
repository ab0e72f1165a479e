#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace todopatch {

// ---------------------------------------------------------------------------
// Error hierarchy. Each named failure mode in the pipeline gets its own type
// so callers can catch exactly what they are prepared to handle.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotARepository : Error {
  using Error::Error;
};
struct CorruptHistory : Error {
  using Error::Error;
};
struct ParseFailure : Error {
  ParseFailure(std::string file, int line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file(std::move(file)),
        line(line) {}
  std::string file;
  int line;
};
struct NoCentrepiece : Error {
  using Error::Error;
};
struct CorpusExhausted : Error {
  using Error::Error;
};
struct TooFewProjects : Error {
  using Error::Error;
};
struct SchemaMismatch : Error {
  using Error::Error;
};
struct MalformedRecord : Error {
  MalformedRecord(std::size_t line_no, const std::string& what)
      : Error("line " + std::to_string(line_no) + ": " + what),
        line_no(line_no) {}
  std::size_t line_no;
};
struct EmptyCorpus : Error {
  using Error::Error;
};
struct DegenerateEmbedding : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct NonFiniteLoss : Error {
  using Error::Error;
};
struct EmptyPool : Error {
  using Error::Error;
};
struct MissingResults : Error {
  using Error::Error;
};
struct StaleInput : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Deterministic RNG. SplitMix64 underneath: portable across platforms and
// standard-library versions, unlike std::uniform_*_distribution. Streams can
// be derived from a label so per-group sampling is identical whether groups
// are processed serially or in parallel.
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) %
           n;
  }

  template <typename Vec>
  void shuffle(Vec& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

  // Independent stream keyed on (construction seed, label).
  Rng derive(std::string_view label) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

std::uint64_t fnv1a64(std::string_view data);

// ---------------------------------------------------------------------------
// String helpers.
// ---------------------------------------------------------------------------

std::string trim(std::string_view s);
std::vector<std::string> split_lines(std::string_view text);
std::vector<std::string> split_ws(std::string_view s);
// Collapses runs of whitespace to single spaces and trims the ends.
std::string collapse_ws(std::string_view s);
bool ends_with(std::string_view s, std::string_view suffix);

// Locale-independent float formatting: shortest representation that parses
// back to the same double, capped at 17 significant digits.
std::string format_double(double v);
// Fixed-point with the given number of decimals (for CSV/tables).
std::string format_fixed(double v, int decimals);

// ---------------------------------------------------------------------------
// Subprocess execution without a shell.
// ---------------------------------------------------------------------------

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
  bool ok() const { return exit_code == 0; }
};

ProcessResult run_process(const std::vector<std::string>& argv);

// ---------------------------------------------------------------------------
// File and digest helpers.
// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view content);

std::string sha256_hex(std::string_view data);
std::string sha256_hex_file(const std::filesystem::path& p);

// Runs fn(i) for i in [0, n) across at most `workers` threads. Exceptions
// from workers are rethrown on the calling thread. Results must be written
// by index so output order never depends on scheduling.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace todopatch
