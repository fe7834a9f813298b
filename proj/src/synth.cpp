#include "flowsift/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "flowsift/error.hpp"
#include "flowsift/random.hpp"

namespace flowsift {
namespace {

constexpr std::array<const char*, 3> kProtocols = {"tcp", "udp", "icmp"};
constexpr std::array<double, 3> kBenignProtocolMix = {0.55, 0.40, 0.05};
// Log-odds boost per unit of separation.
constexpr std::array<double, 3> kBotnetProtocolBoost = {0.6, -0.8, 1.6};

constexpr std::array<std::uint16_t, 6> kServicePorts = {53, 80, 443, 123, 22, 993};
constexpr std::array<std::uint16_t, 3> kCommandPorts = {6667, 1433, 4444};

constexpr double kSmallPacketLog = 4.1589;  // ln(64)
constexpr double kSmallPacketSd = 0.30;
constexpr double kBulkPacketLog = 6.6846;  // ln(800)
constexpr double kBulkPacketSd = 0.50;

std::size_t pick(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (const double w : weights) total += w;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return weights.size() - 1;
}

std::string ipv4(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
  return std::to_string(a) + '.' + std::to_string(b) + '.' + std::to_string(c) + '.' +
         std::to_string(d);
}

std::string format_start_time(std::int64_t micros) {
  // 2011-08-10 00:00:00 UTC is day 15196 since the epoch.
  constexpr std::int64_t kBaseDay = 15196;
  const std::int64_t secs = micros / 1'000'000;
  const auto frac = static_cast<long>(micros % 1'000'000);
  const std::int64_t day = kBaseDay + secs / 86400;
  const std::int64_t tod = secs % 86400;
  // civil_from_days
  const std::int64_t z = day + 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  const auto y = static_cast<long>(yoe) + static_cast<long>(era) * 400 + (m <= 2);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04ld/%02u/%02u %02ld:%02ld:%02ld.%06ld", y, m, d,
                static_cast<long>(tod / 3600), static_cast<long>(tod / 60 % 60),
                static_cast<long>(tod % 60), frac);
  return buf;
}

}  // namespace

void SynthConfig::validate() const {
  if (n < 100) throw ConfigError("synthetic n must be >= 100");
  if (!(prevalence > 0.0 && prevalence < 1.0)) throw ConfigError("prevalence must lie in (0,1)");
  if (!(separation >= 0.0)) throw ConfigError("separation must be >= 0");
}

std::vector<SynthFlow> generate(const SynthConfig& config) {
  config.validate();
  const auto botnets = static_cast<std::size_t>(
      std::llround(static_cast<double>(config.n) * config.prevalence));
  std::vector<ClassLabel> labels(config.n, ClassLabel::Benign);
  std::fill_n(labels.begin(), std::min(botnets, config.n), ClassLabel::Botnet);
  Rng rng(derive_seed(config.seed, SeedPurpose::Synth));
  rng.shuffle(std::span<ClassLabel>(labels));

  const double s = config.separation;
  std::array<double, 3> botnet_mix{};
  for (std::size_t i = 0; i < botnet_mix.size(); ++i)
    botnet_mix[i] = kBenignProtocolMix[i] * std::exp(s * kBotnetProtocolBoost[i]);
  const double command_port_rate = std::min(1.0, 0.35 * s);
  const double duration_sd = 2.0 / (1.0 + 0.6 * s);

  std::vector<SynthFlow> flows(config.n);
  std::int64_t clock_us = 9 * 3600'000'000LL + 46 * 60'000'000LL + 53'047'277LL;
  for (std::size_t i = 0; i < config.n; ++i) {
    auto& out = flows[i];
    const bool bot = labels[i] == ClassLabel::Botnet;
    out.label = labels[i];
    RawFlow& f = out.flow;

    clock_us += static_cast<std::int64_t>(rng.below(20'000)) + 1;
    f.start_time = static_cast<double>(clock_us) / 1e6;

    const std::size_t proto = pick(rng, bot ? std::span<const double>(botnet_mix)
                                            : std::span<const double>(kBenignProtocolMix));
    f.protocol = kProtocols[proto];
    const bool icmp = proto == 2;

    f.tot_pkts = static_cast<std::uint64_t>(std::max(1.0, std::round(std::exp(1.2 + 1.3 * rng.normal()))));

    const double small_mode_rate = bot ? 0.5 + 0.5 * std::min(1.0, s) : 0.5;
    double log_bpp = 0.0;
    if (rng.uniform() < small_mode_rate) {
      const double shift = bot ? 2.0 * kSmallPacketSd * s : 0.0;
      log_bpp = kSmallPacketLog + shift + kSmallPacketSd * rng.normal();
    } else {
      log_bpp = kBulkPacketLog + kBulkPacketSd * rng.normal();
    }
    const double bpp = std::clamp(std::exp(log_bpp), 28.0, 1500.0);
    f.tot_bytes = static_cast<std::uint64_t>(std::round(bpp * static_cast<double>(f.tot_pkts)));

    const double share_logit = -1.0 + 1.2 * (rng.normal() + (bot ? s : 0.0));
    const double share = 1.0 / (1.0 + std::exp(-share_logit));
    f.src_bytes = std::min<std::uint64_t>(
        f.tot_bytes, static_cast<std::uint64_t>(std::round(share * static_cast<double>(f.tot_bytes))));

    const double log_duration = -0.5 + (bot ? duration_sd : 2.0) * rng.normal();
    f.duration = f.tot_pkts == 1 ? 0.0 : std::round(std::exp(log_duration) * 1e6) / 1e6;

    if (icmp) {
      f.src_port = static_cast<std::uint16_t>(rng.uniform() < 0.5 ? 8 : 3);
      f.dst_port = static_cast<std::uint16_t>(rng.below(4));
    } else {
      f.src_port = static_cast<std::uint16_t>(49152 + rng.below(16384));
      if (bot && rng.uniform() < command_port_rate) {
        f.dst_port = kCommandPorts[rng.below(kCommandPorts.size())];
      } else {
        const double u = rng.uniform();
        if (u < 0.6) {
          f.dst_port = kServicePorts[rng.below(kServicePorts.size())];
        } else if (u < 0.95) {
          f.dst_port = static_cast<std::uint16_t>(1024 + rng.below(48128));
        } else {
          f.dst_port = static_cast<std::uint16_t>(49152 + rng.below(16384));
        }
      }
    }

    if (bot) {
      f.src_addr = ipv4(147, 32, 84, 165 + static_cast<std::uint32_t>(rng.below(10)));
      f.label_raw = std::string("flow=From-Botnet-V42-") + (icmp ? "ICMP" : proto == 0 ? "TCP-Established" : "UDP-DNS");
    } else {
      f.src_addr = ipv4(147, 32, 80 + static_cast<std::uint32_t>(rng.below(8)),
                        static_cast<std::uint32_t>(rng.below(254)) + 1);
      f.label_raw = rng.uniform() < 0.9 ? "flow=Background-Established-cmpgw-CVUT"
                                        : "flow=To-Normal-V42-Grill";
    }
    f.dst_addr = ipv4(static_cast<std::uint32_t>(rng.below(223)) + 1,
                      static_cast<std::uint32_t>(rng.below(256)),
                      static_cast<std::uint32_t>(rng.below(256)),
                      static_cast<std::uint32_t>(rng.below(254)) + 1);
  }
  return flows;
}

void write_binetflow(std::ostream& out, std::span<const SynthFlow> flows) {
  out << "StartTime,Dur,Proto,SrcAddr,Sport,Dir,DstAddr,Dport,State,sTos,dTos,TotPkts,TotBytes,"
         "SrcBytes,Label\n";
  char port_buf[16];
  auto port = [&](const std::optional<std::uint16_t>& p, bool hex) -> std::string {
    if (!p) return "";
    if (hex) {
      std::snprintf(port_buf, sizeof(port_buf), "0x%04x", static_cast<unsigned>(*p));
      return port_buf;
    }
    return std::to_string(*p);
  };
  char dur_buf[32];
  for (const auto& sf : flows) {
    const RawFlow& f = sf.flow;
    const bool icmp = f.protocol == "icmp";
    std::snprintf(dur_buf, sizeof(dur_buf), "%.6f", f.duration);
    const auto micros = static_cast<std::int64_t>(std::llround(f.start_time.value_or(0.0) * 1e6));
    out << format_start_time(micros) << ',' << dur_buf << ',' << f.protocol << ',' << f.src_addr
        << ',' << port(f.src_port, icmp) << ',' << (icmp ? "->" : "<->") << ',' << f.dst_addr
        << ',' << port(f.dst_port, icmp) << ',' << (icmp ? "ECO" : f.protocol == "tcp" ? "FSPA_FSPA" : "CON")
        << ",0,0," << f.tot_pkts << ',' << f.tot_bytes << ',' << f.src_bytes << ','
        << f.label_raw << '\n';
  }
}

void write_binetflow(const std::filesystem::path& path, std::span<const SynthFlow> flows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_binetflow(out, flows);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace flowsift
