#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "adsurv/creative.hpp"

namespace adsurv {

// Knobs for the synthetic corpus. The mechanism: every creative draws a latent
// quality q and a fatigue speed u. Low-q ("doomed") creatives start with a bad
// expected CPA-to-target ratio and collapse within days; healthy creatives run
// profitably until the post-day-10 fatigue decay pushes their CPA over the
// advertiser's tolerance. An oracle advertiser watches the 3-day rolling CPA
// ratio and discontinues on the first day it exceeds `oracle_threshold`.
// Absolute scales (impressions, CPC, sales value) are arbitrary constants; only
// relative behavior is calibrated.
struct GeneratorConfig {
  std::uint64_t seed = 42;
  std::size_t n_campaigns = 150;
  std::size_t campaign_size_min = 20;
  std::size_t campaign_size_max = 50;
  std::size_t n_creatives = 5000;  // exact total; drawn sizes are adjusted
  double cutout_fraction = 0.815;  // share of low-q creatives
  double horizon_days = 120.0;
  bool censor_at_horizon = true;

  // oracle
  double oracle_threshold = 1.5;
  std::size_t oracle_window = 3;

  // latent quality bands
  double doomed_q_lo = 0.20;
  double doomed_q_hi = 0.58;
  double healthy_q_lo = 0.62;
  double healthy_q_hi = 1.00;

  // serving scales
  double impressions_log_mean = 8.0;  // ~3000/day campaign level
  double impressions_log_sigma = 0.30;
  double daily_impression_sigma = 0.20;
  double base_ctr_lo = 0.25;
  double base_ctr_hi = 0.45;
  double cpc_lo = 0.60;
  double cpc_hi = 1.00;

  // expected CPA-to-target ratio at launch is ratio_scale / q, jittered
  double ratio_scale = 0.50;
  double ratio_log_jitter = 0.04;
  double target_slack_lo = 1.25;  // campaign target_cpa slack over a global mid
  double target_slack_hi = 1.45;
  // scales conversion volume without touching the CPA ratio (target moves too)
  double cvr_scale = 0.020;

  // fatigue: per-day multiplicative CTR/CVR decay, faster for high u
  double doomed_decay_lo = 0.70;
  double doomed_decay_hi = 0.88;
  double wearout_decay_lo = 0.930;
  double wearout_decay_hi = 0.996;
  // curvature of the fatigue-speed -> wear-out decay mapping. 1 = linear;
  // larger values concentrate healthy creatives toward slow decay, spreading
  // wear-out deaths across the late intervals instead of piling them up just
  // past the short horizon.
  double wearout_shape = 1.0;
  // daily probability (after day 10) that a surviving creative is stopped for
  // reasons outside its serving stats: budget reallocations, campaign
  // refreshes. Keeps long lifetimes noisy even given perfect features.
  double random_stop_hazard = 0.0;

  // fabricated content embeddings: isotropic noise plus leaked latent
  // directions. Both modalities leak quality; fatigue speed leaks mostly
  // through the image (embed_signal_u) with an optional weaker echo in the
  // text (embed_signal_u_text), so dropping the image loses most of the
  // fatigue signal. embed_interact adds a quality-by-fatigue product
  // direction to the image (off by default).
  std::size_t text_dim = 16;
  std::size_t image_dim = 16;
  double embed_noise = 1.0;
  double embed_signal = 1.2;
  double embed_signal_u = 2.2;
  double embed_signal_u_text = 0.0;
  double embed_interact = 0.0;

  // per-campaign value of one conversion (log-normal, heavy tail)
  double sales_value_log_mean = 1.6;
  double sales_value_log_sigma = 0.8;
};

// Throws std::invalid_argument when ranges are inverted, fractions leave
// [0,1], the horizon undercuts the long grid, or the corpus is empty.
void validate_config(const GeneratorConfig& config);

struct GeneratedDataset {
  std::vector<AdCreative> creatives;
  std::vector<OracleTrace> traces;  // index-aligned with creatives
};

GeneratedDataset generate(const GeneratorConfig& config);

// Multiplicative CTR/CVR fatigue at `day`: 1 until the mechanism's onset
// (day 1 for doomed creatives, day 10 for wear-out), then decay^(days past).
double fatigue_factor(bool doomed, double decay, int day);

// Lifetime buckets [0,3), [3,7), [7,inf): creative-count and sales shares.
struct BucketShares {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> count_share{};
  std::array<double, 3> sales{};
  std::array<double, 3> sales_share{};
};
BucketShares bucket_shares(const std::vector<AdCreative>& creatives);

enum class Split { kTrain, kVal, kTest };
std::string split_name(Split split);

struct SplitFractions {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

// Whole campaigns go to one split. Campaigns are stratified into deciles of
// mean creative lifetime, then dealt greedily toward the target creative-count
// fractions inside each decile (seeded order). Falls back to unstratified
// dealing below 10 campaigns; fewer than 3 campaigns is an error.
struct SplitResult {
  std::map<std::string, Split> by_campaign;
  bool stratified = true;
  std::string note;  // non-empty on fallback
};

SplitResult split_campaigns(const std::vector<AdCreative>& creatives,
                            const SplitFractions& fractions, std::uint64_t seed);

// Convenience: creatives of one split, in corpus order.
std::vector<AdCreative> creatives_in_split(
    const std::vector<AdCreative>& creatives, const SplitResult& split,
    Split which);

}  // namespace adsurv
