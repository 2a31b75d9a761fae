#include "whyqa/manifest.hpp"

#include <openssl/evp.h>

#include <memory>

#include "whyqa/errors.hpp"

namespace whyqa {

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                               EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw Error("internal", "sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(read_text_file(path));
}

void RunManifest::add_input(const std::filesystem::path& p) {
  input_digests[p.string()] = sha256_file(p);
}

void RunManifest::add_output(const std::filesystem::path& p) {
  output_digests[p.string()] = sha256_file(p);
}

Json manifest_to_json(const RunManifest& m) {
  Json flags = Json::object();
  for (const auto& [k, v] : m.flags) flags[k] = v;
  Json in = Json::object();
  for (const auto& [k, v] : m.input_digests) in[k] = v;
  Json out = Json::object();
  for (const auto& [k, v] : m.output_digests) out[k] = v;
  Json seeds = Json::object();
  for (const auto& [k, v] : m.seeds) seeds[k] = v;
  Json j = {{"subcommand", m.subcommand},
            {"flags", std::move(flags)},
            {"inputs", std::move(in)},
            {"outputs", std::move(out)},
            {"seeds", std::move(seeds)},
            {"tool_version", m.tool_version}};
  j["experiment"] = m.experiment ? experiment_tag_to_json(*m.experiment) : Json();
  j["timestamp"] = m.timestamp;
  return j;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& artifact) {
  return artifact.string() + ".manifest.json";
}

}  // namespace whyqa
