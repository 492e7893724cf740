#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace flicksim {

struct RatingScale {
  double lo = 1.0;
  double hi = 5.0;
  bool operator==(const RatingScale&) const = default;
};

struct MovieRecord {
  std::string movie_id;
  std::string title;
  std::vector<std::string> genres;
  int release_year = 0;
  int runtime_minutes = 0;
  std::string content_rating;  // G, PG, PG-13, R, NC-17, NR
};

struct RatingRow {
  std::string user_id;
  std::string movie_id;
  double rating = 0.0;
  std::int64_t timestamp = 0;
};

// Catalog with an id index; the index is rebuilt on mutation via add().
struct Catalog {
  std::vector<MovieRecord> movies;
  std::unordered_map<std::string, std::size_t> index;

  void add(MovieRecord m);
  const MovieRecord* find(const std::string& movie_id) const;
  std::vector<std::string> ids_of_genre(const std::string& genre) const;
};

struct IngestReport {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::vector<std::string> sample_errors;  // capped, for diagnostics
};

struct RatingsCorpus {
  Catalog catalog;
  std::vector<RatingRow> ratings;
  RatingScale scale;
  IngestReport report;

  // distinct user ids in first-seen order
  std::vector<std::string> user_ids() const;
};

// MovieLens-compatible delimited ingest.
//   ratings: header `userId,movieId,rating,timestamp`
//   movies:  header `movieId,title,genres`, genres pipe-separated
// Runtime and content rating are not in the source format; they are derived
// deterministically from the movie record (hash-based runtime, genre-driven
// content rating) so the catalog satisfies the full record shape.
// Malformed rows are counted and reported; ingest aborts only when the
// rejected fraction exceeds 1% with more than 10 rejected rows.
RatingsCorpus ingest_corpus(const std::string& ratings_path,
                            const std::string& movies_path,
                            RatingScale scale = {});

// Quote-aware CSV field splitter (shared with the event grammar tests).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace flicksim
