#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adsurv/creative.hpp"

namespace adsurv {

// Sidecar written next to a generated dataset. Everything a consumer needs to
// reproduce feature encoding without rescanning the corpus.
struct DatasetMetadata {
  std::uint32_t schema_version = 1;
  std::uint64_t seed = 0;
  std::size_t n_campaigns = 0;
  std::size_t n_creatives = 0;
  std::size_t text_dim = 0;
  std::size_t image_dim = 0;
  std::vector<std::string> genre_vocab;  // index 0 is the unknown bucket
  double p95_impressions = 0.0;          // creative-total normalizer
  std::map<std::string, std::string> campaign_split;  // id -> train/val/test
};

// One line of a predictions file.
struct PredictionRecord {
  std::string creative_id;
  // head name -> hazard (or scalar) values, in model head order
  std::vector<std::pair<std::string, std::vector<double>>> heads;
  std::vector<double> merged;  // overall-grid hazards; empty for non-MTL tasks
  double risk_score = 0.0;
  std::optional<std::size_t> flagged_interval;  // first interval over threshold
};

// JSONL, one creative per line, keys in a fixed order. round-trip exact.
void write_creatives_jsonl(const std::string& path,
                           const std::vector<AdCreative>& creatives);
std::vector<AdCreative> read_creatives_jsonl(const std::string& path);

void write_oracle_jsonl(const std::string& path,
                        const std::vector<OracleTrace>& traces);
std::vector<OracleTrace> read_oracle_jsonl(const std::string& path);

// Flat daily table: creative_id,day,impressions,clicks,conversions,spend.
void write_daily_csv(const std::string& path,
                     const std::vector<AdCreative>& creatives);
// Replaces the daily histories of matching creatives with rows from the CSV.
// Rows naming unknown creatives are an error, as are non-contiguous days.
void apply_daily_csv(std::vector<AdCreative>& creatives,
                     const std::string& path);

void write_metadata_json(const std::string& path, const DatasetMetadata& meta);
DatasetMetadata read_metadata_json(const std::string& path);

void write_predictions_jsonl(const std::string& path,
                             const std::vector<PredictionRecord>& records);
std::vector<PredictionRecord> read_predictions_jsonl(const std::string& path);

}  // namespace adsurv
