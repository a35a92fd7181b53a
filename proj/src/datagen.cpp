#include "adsurv/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "adsurv/rng.hpp"
#include "adsurv/time_grid.hpp"

namespace adsurv {

namespace {

constexpr const char* kGenres[] = {
    "auto",    "beauty", "education", "entertainment", "fashion", "finance",
    "food",    "games",  "health",    "sports",        "tech",    "travel"};
constexpr std::size_t kGenreCount = sizeof(kGenres) / sizeof(kGenres[0]);
constexpr const char* kGenders[] = {"all", "male", "female"};

// Campaign targets hover around one global mid CPA so that a creative's raw
// CPA is comparable across campaigns (the target itself is not a feature).

std::string zero_pad(std::size_t value, int width) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

std::vector<double> unit_direction(std::mt19937_64& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm2 = 0.0;
  for (auto& x : v) {
    x = normal01(rng);
    norm2 += x * x;
  }
  const double norm = std::sqrt(norm2);
  if (norm > 0.0)
    for (auto& x : v) x /= norm;
  return v;
}

struct LeakDirections {
  std::vector<double> q_text, u_text, x_text;
  std::vector<double> q_image, u_image, x_image;
};

std::vector<double> fabricate_embedding(std::mt19937_64& rng,
                                        const GeneratorConfig& cfg,
                                        std::size_t dim,
                                        const std::vector<double>& q_dir,
                                        const std::vector<double>& u_dir,
                                        const std::vector<double>& x_dir,
                                        double q2, double u2, double q_scale,
                                        double u_scale, double x_scale) {
  std::vector<double> e(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    e[i] = cfg.embed_noise * normal01(rng) + q_scale * q2 * q_dir[i] +
           u_scale * u2 * u_dir[i] + x_scale * q2 * u2 * x_dir[i];
  }
  return e;
}

std::vector<std::size_t> campaign_sizes(const GeneratorConfig& cfg,
                                        std::mt19937_64& rng) {
  std::vector<std::size_t> sizes(cfg.n_campaigns);
  for (auto& s : sizes) {
    s = cfg.campaign_size_min +
        static_cast<std::size_t>(bounded(
            rng, cfg.campaign_size_max - cfg.campaign_size_min + 1));
  }
  // Nudge drawn sizes until the total is exact; overshooting the configured
  // max by a creative or two is harmless, dropping below 1 is not.
  std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  std::size_t idx = 0;
  while (total < cfg.n_creatives) {
    ++sizes[idx % sizes.size()];
    ++total;
    ++idx;
  }
  while (total > cfg.n_creatives) {
    auto& s = sizes[idx % sizes.size()];
    if (s > 1) {
      --s;
      --total;
    }
    ++idx;
  }
  return sizes;
}

}  // namespace

void validate_config(const GeneratorConfig& cfg) {
  const auto fail = [](const std::string& why) {
    throw std::invalid_argument("generator config: " + why);
  };
  if (cfg.n_creatives == 0) fail("n_creatives must be >= 1");
  if (cfg.n_campaigns == 0) fail("n_campaigns must be >= 1");
  if (cfg.campaign_size_min < 1 || cfg.campaign_size_min > cfg.campaign_size_max)
    fail("campaign size range is invalid");
  if (cfg.cutout_fraction < 0.0 || cfg.cutout_fraction > 1.0)
    fail("cutout_fraction must lie in [0,1]");
  if (cfg.horizon_days < TimeGrid::long_term().bounds().back())
    fail("horizon must cover the long grid");
  if (cfg.oracle_threshold <= 0.0) fail("oracle_threshold must be positive");
  if (cfg.oracle_window < 1) fail("oracle_window must be >= 1");
  const auto check_range = [&](double lo, double hi, const char* name) {
    if (!(lo <= hi)) fail(std::string(name) + " range is inverted");
  };
  check_range(cfg.doomed_q_lo, cfg.doomed_q_hi, "doomed_q");
  check_range(cfg.healthy_q_lo, cfg.healthy_q_hi, "healthy_q");
  check_range(cfg.base_ctr_lo, cfg.base_ctr_hi, "base_ctr");
  check_range(cfg.cpc_lo, cfg.cpc_hi, "cpc");
  check_range(cfg.target_slack_lo, cfg.target_slack_hi, "target_slack");
  check_range(cfg.doomed_decay_lo, cfg.doomed_decay_hi, "doomed_decay");
  check_range(cfg.wearout_decay_lo, cfg.wearout_decay_hi, "wearout_decay");
  if (cfg.doomed_q_lo <= 0.0 || cfg.healthy_q_hi > 1.0)
    fail("quality bands must lie in (0,1]");
  if (cfg.doomed_decay_lo <= 0.0 || cfg.doomed_decay_hi >= 1.0 ||
      cfg.wearout_decay_lo <= 0.0 || cfg.wearout_decay_hi >= 1.0)
    fail("decay factors must lie in (0,1)");
  if (cfg.base_ctr_lo <= 0.0 || cfg.base_ctr_hi >= 1.0)
    fail("base_ctr must lie in (0,1)");
  if (cfg.cpc_lo <= 0.0) fail("cpc must be positive");
  if (cfg.ratio_scale <= 0.0) fail("ratio_scale must be positive");
  if (cfg.cvr_scale <= 0.0 || cfg.cvr_scale >= 1.0)
    fail("cvr_scale must lie in (0,1)");
  if (cfg.text_dim == 0 || cfg.image_dim == 0)
    fail("embedding dims must be >= 1");
  if (cfg.embed_noise < 0.0 || cfg.embed_signal < 0.0 ||
      cfg.embed_signal_u < 0.0 || cfg.embed_signal_u_text < 0.0 ||
      cfg.embed_interact < 0.0)
    fail("embedding scales must be non-negative");
  if (cfg.random_stop_hazard < 0.0 || cfg.random_stop_hazard >= 1.0)
    fail("random_stop_hazard must lie in [0,1)");
  if (!(cfg.wearout_shape > 0.0))
    fail("wearout_shape must be positive");
}

double fatigue_factor(bool doomed, double decay, int day) {
  // Doomed creatives collapse from day 2; wear-out fatigue starts after the
  // short/long grid boundary at day 10.
  const int delay = doomed ? 1 : 10;
  if (day <= delay) return 1.0;
  return std::pow(decay, day - delay);
}

GeneratedDataset generate(const GeneratorConfig& cfg) {
  validate_config(cfg);

  std::mt19937_64 corpus_rng(mix_seed(cfg.seed, 0));
  LeakDirections dirs;
  dirs.q_text = unit_direction(corpus_rng, cfg.text_dim);
  dirs.u_text = unit_direction(corpus_rng, cfg.text_dim);
  dirs.q_image = unit_direction(corpus_rng, cfg.image_dim);
  dirs.u_image = unit_direction(corpus_rng, cfg.image_dim);
  const std::vector<std::size_t> sizes = campaign_sizes(cfg, corpus_rng);
  dirs.x_text = unit_direction(corpus_rng, cfg.text_dim);
  dirs.x_image = unit_direction(corpus_rng, cfg.image_dim);

  const int horizon = static_cast<int>(cfg.horizon_days);
  const double mid_cpc = 0.5 * (cfg.cpc_lo + cfg.cpc_hi);

  GeneratedDataset out;
  out.creatives.reserve(cfg.n_creatives);
  out.traces.reserve(cfg.n_creatives);

  for (std::size_t ci = 0; ci < sizes.size(); ++ci) {
    const std::uint64_t campaign_seed = mix_seed(cfg.seed, 1 + ci);
    std::mt19937_64 crng(campaign_seed);
    const std::string campaign_id = "cp-" + zero_pad(ci, 4);
    const std::string genre = kGenres[bounded(crng, kGenreCount)];
    const std::string gender = kGenders[bounded(crng, 3)];
    const double slack =
        uniform_range(crng, cfg.target_slack_lo, cfg.target_slack_hi);
    const double target_cpa = slack * mid_cpc / cfg.cvr_scale;
    const double value_per_conversion =
        lognormal(crng, cfg.sales_value_log_mean, cfg.sales_value_log_sigma);
    const double impression_level =
        lognormal(crng, cfg.impressions_log_mean, cfg.impressions_log_sigma);

    for (std::size_t k = 0; k < sizes[ci]; ++k) {
      std::mt19937_64 rng(mix_seed(campaign_seed, 1 + k));
      AdCreative c;
      c.creative_id = "cr-" + zero_pad(ci, 4) + "-" + zero_pad(k, 3);
      c.campaign_id = campaign_id;
      c.gender = gender;
      c.genre = genre;
      c.target_cpa = target_cpa;

      const bool doomed = uniform01(rng) < cfg.cutout_fraction;
      const double q = doomed
                           ? uniform_range(rng, cfg.doomed_q_lo, cfg.doomed_q_hi)
                           : uniform_range(rng, cfg.healthy_q_lo, cfg.healthy_q_hi);
      const double u = uniform01(rng);
      const double base_ctr = uniform_range(rng, cfg.base_ctr_lo, cfg.base_ctr_hi);
      const double cpc = uniform_range(rng, cfg.cpc_lo, cfg.cpc_hi);
      const double ratio0 = (cfg.ratio_scale / q) *
                            std::exp(cfg.ratio_log_jitter * normal01(rng));
      // exogenous stop day (budget cuts etc.), geometric after day 10; the
      // draw is unconditional so the stream layout does not depend on config.
      const double stop_u = uniform01(rng);
      int random_stop_day = horizon + 1;
      if (cfg.random_stop_hazard > 0.0) {
        const double k =
            std::floor(std::log(stop_u) / std::log1p(-cfg.random_stop_hazard));
        if (10.0 + k < static_cast<double>(horizon))
          random_stop_day = 11 + static_cast<int>(k);
      }
      const double ctr0 = std::min(base_ctr * (0.25 + 0.75 * q), 0.95);
      // cpc/cvr0 == ratio0 * target_cpa exactly, so the expected launch CPA
      // ratio is ratio0 while cvr_scale sets absolute conversion volume.
      const double cvr0 = std::min(cpc / (target_cpa * ratio0), 0.95);
      const double decay =
          doomed ? cfg.doomed_decay_hi -
                       u * (cfg.doomed_decay_hi - cfg.doomed_decay_lo)
                 : cfg.wearout_decay_hi -
                       std::pow(u, cfg.wearout_shape) *
                           (cfg.wearout_decay_hi - cfg.wearout_decay_lo);

      // text carries the quality leak; image carries quality plus the
      // fatigue-speed leak, so the image modality has signal the text one
      // cannot substitute for.
      c.text_embedding = fabricate_embedding(
          rng, cfg, cfg.text_dim, dirs.q_text, dirs.u_text, dirs.x_text,
          2.0 * q - 1.0, 2.0 * u - 1.0, cfg.embed_signal,
          cfg.embed_signal_u_text, 0.0);
      c.image_embedding = fabricate_embedding(
          rng, cfg, cfg.image_dim, dirs.q_image, dirs.u_image, dirs.x_image,
          2.0 * q - 1.0, 2.0 * u - 1.0, cfg.embed_signal, cfg.embed_signal_u,
          cfg.embed_interact);

      OracleTrace trace;
      trace.creative_id = c.creative_id;

      std::uint64_t total_conversions = 0;
      bool died = false;
      for (int day = 1; day <= horizon; ++day) {
        const double factor = fatigue_factor(doomed, decay, day);
        // Wear-out fatigue hits clicks harder than conversion propensity, so
        // long-running creatives shed volume while their CPA (cpc/cvr, clicks
        // cancel) degrades at the plain decay rate.
        const double ctr_factor = doomed ? factor : factor * factor * factor;
        const double ctr_d = std::clamp(ctr0 * ctr_factor, 0.0, 0.95);
        const double cvr_d = std::clamp(cvr0 * factor, 0.0, 0.95);
        const double level = impression_level *
                             std::exp(cfg.daily_impression_sigma * normal01(rng));
        DailyPerformance row;
        row.day = day;
        row.impressions = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::llround(level)));
        row.clicks = binomial(rng, row.impressions, ctr_d);
        row.conversions = binomial(rng, row.clicks, cvr_d);
        row.spend = static_cast<double>(row.clicks) * cpc;
        c.daily.push_back(row);
        total_conversions += row.conversions;

        double window_spend = 0.0;
        std::uint64_t window_conversions = 0;
        const std::size_t start =
            c.daily.size() >= cfg.oracle_window ? c.daily.size() - cfg.oracle_window
                                                : 0;
        for (std::size_t i = start; i < c.daily.size(); ++i) {
          window_spend += c.daily[i].spend;
          window_conversions += c.daily[i].conversions;
        }
        const double ratio =
            window_conversions > 0
                ? (window_spend / static_cast<double>(window_conversions)) /
                      target_cpa
                : std::numeric_limits<double>::infinity();
        trace.cpa_ratio_series.push_back(ratio);

        if (ratio > cfg.oracle_threshold || day >= random_stop_day) {
          c.lifetime_days = day;
          c.censored = false;
          died = true;
          break;
        }
      }
      if (!died) {
        c.lifetime_days = cfg.horizon_days;
        c.censored = cfg.censor_at_horizon;
      }
      c.total_sales =
          static_cast<double>(total_conversions) * value_per_conversion;

      trace.discontinuation_day = c.lifetime_days;
      if (!died)
        trace.mechanism = "censored";
      else if (c.lifetime_days <= 10.0)
        trace.mechanism = "cut-out";
      else
        trace.mechanism = "wear-out";

      out.creatives.push_back(std::move(c));
      out.traces.push_back(std::move(trace));
    }
  }
  return out;
}

BucketShares bucket_shares(const std::vector<AdCreative>& creatives) {
  if (creatives.empty())
    throw std::invalid_argument("bucket_shares: empty dataset");
  BucketShares shares;
  for (const AdCreative& c : creatives) {
    const std::size_t b = c.lifetime_days < 3.0 ? 0
                          : c.lifetime_days < 7.0 ? 1
                                                  : 2;
    ++shares.counts[b];
    shares.sales[b] += c.total_sales;
  }
  const double n = static_cast<double>(creatives.size());
  const double total_sales = shares.sales[0] + shares.sales[1] + shares.sales[2];
  for (std::size_t b = 0; b < 3; ++b) {
    shares.count_share[b] = static_cast<double>(shares.counts[b]) / n;
    shares.sales_share[b] =
        total_sales > 0.0 ? shares.sales[b] / total_sales : 0.0;
  }
  return shares;
}

std::string split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  throw std::logic_error("unknown split");
}

SplitResult split_campaigns(const std::vector<AdCreative>& creatives,
                            const SplitFractions& fractions,
                            std::uint64_t seed) {
  if (fractions.train < 0.0 || fractions.val < 0.0 || fractions.test < 0.0 ||
      std::abs(fractions.train + fractions.val + fractions.test - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must be non-negative and sum to 1");

  struct CampaignStat {
    std::string id;
    std::size_t count = 0;
    double lifetime_sum = 0.0;
    double mean_lifetime() const {
      return lifetime_sum / static_cast<double>(count);
    }
  };
  std::map<std::string, CampaignStat> stats;
  for (const AdCreative& c : creatives) {
    CampaignStat& s = stats[c.campaign_id];
    s.id = c.campaign_id;
    ++s.count;
    s.lifetime_sum += c.lifetime_days;
  }
  if (stats.size() < 3)
    throw std::invalid_argument("split requires at least 3 campaigns");

  std::vector<CampaignStat> campaigns;
  campaigns.reserve(stats.size());
  for (auto& [id, s] : stats) campaigns.push_back(s);
  std::sort(campaigns.begin(), campaigns.end(),
            [](const CampaignStat& a, const CampaignStat& b) {
              if (a.mean_lifetime() != b.mean_lifetime())
                return a.mean_lifetime() < b.mean_lifetime();
              return a.id < b.id;
            });

  SplitResult result;
  std::size_t n_groups = 10;
  if (campaigns.size() < 10) {
    n_groups = 1;
    result.stratified = false;
    result.note = "fewer than 10 campaigns; falling back to campaign-random split";
  }

  const double targets[3] = {fractions.train, fractions.val, fractions.test};
  double assigned[3] = {0.0, 0.0, 0.0};
  double assigned_total = 0.0;
  std::mt19937_64 rng(mix_seed(seed, 7));

  for (std::size_t g = 0; g < n_groups; ++g) {
    const std::size_t lo = campaigns.size() * g / n_groups;
    const std::size_t hi = campaigns.size() * (g + 1) / n_groups;
    std::vector<CampaignStat> group(campaigns.begin() + lo,
                                    campaigns.begin() + hi);
    deterministic_shuffle(group, rng);
    for (const CampaignStat& c : group) {
      const double size = static_cast<double>(c.count);
      int best = 0;
      double best_deficit = -std::numeric_limits<double>::infinity();
      for (int s = 0; s < 3; ++s) {
        const double deficit =
            targets[s] * (assigned_total + size) - assigned[s];
        if (deficit > best_deficit) {
          best_deficit = deficit;
          best = s;
        }
      }
      result.by_campaign[c.id] = static_cast<Split>(best);
      assigned[best] += size;
      assigned_total += size;
    }
  }
  return result;
}

std::vector<AdCreative> creatives_in_split(
    const std::vector<AdCreative>& creatives, const SplitResult& split,
    Split which) {
  std::vector<AdCreative> out;
  for (const AdCreative& c : creatives) {
    const auto it = split.by_campaign.find(c.campaign_id);
    if (it == split.by_campaign.end())
      throw std::invalid_argument("campaign missing from split: " +
                                  c.campaign_id);
    if (it->second == which) out.push_back(c);
  }
  return out;
}

}  // namespace adsurv
