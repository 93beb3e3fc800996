#include "probnerf/archive.hpp"

#include <fstream>

#include <json.hpp>

#include "probnerf/binary_io.hpp"
#include "probnerf/errors.hpp"

namespace probnerf {

using nlohmann::json;

namespace {
constexpr std::string_view kMagic = "PNRSAMPL";
constexpr std::uint32_t kVersion = 1;
}  // namespace

SampleArchive archive_from_chains(const ChainSet& set, Index latent_dim, Index weight_dim, std::string method) {
  SampleArchive a;
  a.method = std::move(method);
  a.n_chains = static_cast<int>(set.chains.size());
  a.keep_last = set.config.keep_last;
  a.latent_dim = latent_dim;
  a.weight_dim = weight_dim;
  a.seed = set.config.seed;
  a.schedule = set.config.schedule;
  a.n_leapfrog = set.config.n_leapfrog;
  for (std::size_t c = 0; c < set.chains.size(); ++c) {
    const ChainResult& chain = set.chains[c];
    a.chain_seeds.push_back(chain.seed);
    for (std::size_t i = 0; i < chain.samples.size(); ++i) {
      if (chain.samples[i].size() != latent_dim + weight_dim) {
        throw ShapeError("archive_from_chains: state has " + std::to_string(chain.samples[i].size()) +
                         " entries, expected " + std::to_string(latent_dim + weight_dim));
      }
      a.states.push_back(chain.samples[i]);
      a.sample_chain.push_back(static_cast<int>(c));
      a.sample_step.push_back(chain.sample_steps[i]);
    }
  }
  return a;
}

std::string encode_archive(const SampleArchive& a) {
  json h;
  h["method"] = a.method;
  h["n_chains"] = a.n_chains;
  h["keep_last"] = a.keep_last;
  h["latent_dim"] = a.latent_dim;
  h["weight_dim"] = a.weight_dim;
  h["seed"] = a.seed;
  h["chain_seeds"] = a.chain_seeds;
  h["schedule"] = {{"s0", a.schedule.s0}, {"sT", a.schedule.sT}, {"steps", a.schedule.steps},
                   {"base_step", a.schedule.base_step}};
  h["n_leapfrog"] = a.n_leapfrog;
  h["sample_chain"] = a.sample_chain;
  h["sample_step"] = a.sample_step;
  h["n_states"] = a.states.size();
  const std::string text = h.dump();
  std::string out(kMagic);
  io::put_u32(out, kVersion);
  io::put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  for (const Vector& s : a.states) {
    if (s.size() != a.state_dim()) throw ShapeError("encode_archive: state has the wrong dimension");
    io::put_f32(out, s);
  }
  return out;
}

SampleArchive decode_archive(const std::string& bytes) {
  io::Reader in(bytes, "sample archive");
  in.expect_magic(kMagic);
  const std::uint32_t version = in.u32();
  if (version != kVersion) throw FormatError("sample archive: unsupported version " + std::to_string(version));
  SampleArchive a;
  try {
    const json h = json::parse(in.bytes(in.u32()));
    a.method = h.at("method").get<std::string>();
    a.n_chains = h.at("n_chains").get<int>();
    a.keep_last = h.at("keep_last").get<int>();
    a.latent_dim = h.at("latent_dim").get<Index>();
    a.weight_dim = h.at("weight_dim").get<Index>();
    a.seed = h.at("seed").get<std::uint64_t>();
    a.chain_seeds = h.at("chain_seeds").get<std::vector<std::uint64_t>>();
    const json& s = h.at("schedule");
    a.schedule = {s.at("s0").get<double>(), s.at("sT").get<double>(), s.at("steps").get<int>(),
                  s.at("base_step").get<double>()};
    a.n_leapfrog = h.at("n_leapfrog").get<int>();
    a.sample_chain = h.at("sample_chain").get<std::vector<int>>();
    a.sample_step = h.at("sample_step").get<std::vector<int>>();
    const std::size_t n = h.at("n_states").get<std::size_t>();
    for (std::size_t i = 0; i < n; ++i) a.states.push_back(in.f32(a.state_dim()));
  } catch (const json::exception& e) {
    throw FormatError(std::string("sample archive header: ") + e.what());
  }
  if (!in.at_end()) throw FormatError("sample archive: trailing bytes");
  return a;
}

void save_archive(const std::filesystem::path& path, const SampleArchive& archive) {
  io::write_file(path, encode_archive(archive));
}

SampleArchive load_archive(const std::filesystem::path& path) { return decode_archive(io::read_file(path)); }

void write_chain_diagnostics(const std::filesystem::path& path, const ChainResult& chain) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(10);
  out << "t,s_t,step_size,accept_rate,log_joint\n";
  for (const DiagnosticRow& r : chain.diagnostics) {
    out << r.t << ',' << r.s << ',' << r.step_size << ',' << r.accept_prob << ',' << r.log_joint << '\n';
  }
}

}  // namespace probnerf
