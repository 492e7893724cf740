#include "flicksim/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "flicksim/rng.hpp"

namespace flicksim {

void Catalog::add(MovieRecord m) {
  index.emplace(m.movie_id, movies.size());
  movies.push_back(std::move(m));
}

const MovieRecord* Catalog::find(const std::string& movie_id) const {
  auto it = index.find(movie_id);
  return it == index.end() ? nullptr : &movies[it->second];
}

std::vector<std::string> Catalog::ids_of_genre(const std::string& genre) const {
  std::vector<std::string> out;
  for (const auto& m : movies) {
    if (std::find(m.genres.begin(), m.genres.end(), genre) != m.genres.end()) {
      out.push_back(m.movie_id);
    }
  }
  return out;
}

std::vector<std::string> RatingsCorpus::user_ids() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& r : ratings) {
    if (seen.insert(r.user_id).second) out.push_back(r.user_id);
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

namespace {

bool parse_double(const std::string& s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_i64(const std::string& s, std::int64_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

void note_error(IngestReport& rep, const std::string& msg) {
  ++rep.rejected;
  if (rep.sample_errors.size() < 20) rep.sample_errors.push_back(msg);
}

int year_from_title(const std::string& title) {
  // MovieLens convention: "Title (1999)"
  auto close = title.rfind(')');
  if (close == std::string::npos || close < 5) return 0;
  auto open = title.rfind('(', close);
  if (open == std::string::npos || close - open != 5) return 0;
  int y = 0;
  for (std::size_t i = open + 1; i < close; ++i) {
    char c = title[i];
    if (c < '0' || c > '9') return 0;
    y = y * 10 + (c - '0');
  }
  return y;
}

bool has_genre(const MovieRecord& m, const char* g) {
  return std::find(m.genres.begin(), m.genres.end(), g) != m.genres.end();
}

// Runtime/content rating are absent from the source format; derive them as a
// pure function of the record so every ingest of the same file agrees.
void fill_derived_fields(MovieRecord& m) {
  if (m.release_year == 0) m.release_year = year_from_title(m.title);
  if (m.runtime_minutes == 0) {
    std::uint64_t h = hash_str(m.movie_id);
    m.runtime_minutes = 75 + static_cast<int>(h % 91);  // 75..165
  }
  if (m.content_rating.empty()) {
    std::uint64_t h = hash_mix(hash_str(m.movie_id) ^ 0x5bd1e995ULL);
    if (has_genre(m, "Horror")) {
      m.content_rating = (h % 4 == 0) ? "PG-13" : "R";
    } else if (has_genre(m, "Children") || has_genre(m, "Animation")) {
      m.content_rating = (h % 3 == 0) ? "PG" : "G";
    } else {
      static const char* kRatings[] = {"G", "PG", "PG-13", "PG-13", "R", "NR"};
      m.content_rating = kRatings[h % 6];
    }
  }
}

}  // namespace

RatingsCorpus ingest_corpus(const std::string& ratings_path,
                            const std::string& movies_path, RatingScale scale) {
  RatingsCorpus corpus;
  corpus.scale = scale;

  std::ifstream movies_file(movies_path);
  if (!movies_file) {
    throw std::runtime_error("cannot open movies file: " + movies_path);
  }
  std::string line;
  bool header = true;
  while (std::getline(movies_file, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() < 3 || f[0].empty() || f[1].empty()) {
      note_error(corpus.report, "movies: malformed row: " + line);
      continue;
    }
    MovieRecord m;
    m.movie_id = f[0];
    m.title = f[1];
    std::stringstream gs(f[2]);
    std::string g;
    while (std::getline(gs, g, '|')) {
      if (!g.empty() && g != "(no genres listed)") m.genres.push_back(g);
    }
    if (f.size() >= 4 && !f[3].empty()) {
      std::int64_t y;
      if (parse_i64(f[3], y)) m.release_year = static_cast<int>(y);
    }
    if (f.size() >= 5 && !f[4].empty()) {
      std::int64_t rt;
      if (parse_i64(f[4], rt) && rt >= 1) m.runtime_minutes = static_cast<int>(rt);
    }
    if (f.size() >= 6) m.content_rating = f[5];
    fill_derived_fields(m);
    if (corpus.catalog.find(m.movie_id)) {
      note_error(corpus.report, "movies: duplicate id: " + m.movie_id);
      continue;
    }
    corpus.catalog.add(std::move(m));
  }

  std::ifstream ratings_file(ratings_path);
  if (!ratings_file) {
    throw std::runtime_error("cannot open ratings file: " + ratings_path);
  }
  header = true;
  std::size_t total_rows = 0;
  while (std::getline(ratings_file, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    ++total_rows;
    auto f = split_csv_line(line);
    if (f.size() != 4) {
      note_error(corpus.report, "ratings: wrong field count: " + line);
      continue;
    }
    RatingRow r;
    r.user_id = f[0];
    r.movie_id = f[1];
    if (r.user_id.empty() || r.movie_id.empty() || !parse_double(f[2], r.rating) ||
        !parse_i64(f[3], r.timestamp)) {
      note_error(corpus.report, "ratings: malformed row: " + line);
      continue;
    }
    if (r.rating < scale.lo || r.rating > scale.hi) {
      note_error(corpus.report, "ratings: out of scale: " + line);
      continue;
    }
    if (!corpus.catalog.find(r.movie_id)) {
      note_error(corpus.report, "ratings: unknown movie: " + r.movie_id);
      continue;
    }
    corpus.ratings.push_back(std::move(r));
    ++corpus.report.accepted;
  }

  if (corpus.ratings.empty()) {
    throw std::runtime_error("ingest: zero valid rows in " + ratings_path);
  }
  if (corpus.report.rejected > 10 &&
      static_cast<double>(corpus.report.rejected) >
          0.01 * static_cast<double>(total_rows)) {
    throw std::runtime_error(
        "ingest: malformed row fraction exceeds 1% (" +
        std::to_string(corpus.report.rejected) + " of " +
        std::to_string(total_rows) + ")");
  }
  return corpus;
}

}  // namespace flicksim
