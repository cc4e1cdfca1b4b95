// Copyright 2026 The gbdmap Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

#include <curl/curl.h>
#include <openssl/evp.h>

#include "gbdmap/data.h"
#include "gbdmap/errors.h"

namespace gbdmap {
namespace fs = std::filesystem;

namespace {

std::size_t AppendBody(char* data, std::size_t size, std::size_t count, void* out) {
  static_cast<std::string*>(out)->append(data, size * count);
  return size * count;
}

std::string ReadFileBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AcquisitionError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void WriteFileAtomically(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw AcquisitionError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  fs::rename(tmp, path);
}

bool IsUrl(const std::string& source) { return source.find("://") != std::string::npos; }

}  // namespace

std::string Sha256Hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

fs::path DefaultCacheDir() {
  if (const char* dir = std::getenv("GBDMAP_CACHE_DIR"); dir && *dir) return dir;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return fs::path(xdg) / "gbdmap";
  if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "gbdmap";
  return fs::current_path() / ".gbdmap_cache";
}

std::string FetchUrl(const std::string& url) {
  static const CURLcode init = curl_global_init(CURL_GLOBAL_DEFAULT);
  if (init != CURLE_OK) throw AcquisitionError("libcurl initialization failed");
  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), curl_easy_cleanup);
  if (!curl) throw AcquisitionError("libcurl handle creation failed");
  std::string body;
  char message[CURL_ERROR_SIZE] = {0};
  curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, AppendBody);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &body);
  curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_FAILONERROR, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_CONNECTTIMEOUT, 20L);
  curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT, 300L);
  curl_easy_setopt(curl.get(), CURLOPT_ERRORBUFFER, message);
  const CURLcode rc = curl_easy_perform(curl.get());
  if (rc != CURLE_OK) {
    throw AcquisitionError("fetching " + url + " failed: " +
                           (message[0] ? std::string(message) : curl_easy_strerror(rc)));
  }
  return body;
}

ArtifactCache::ArtifactCache(fs::path dir) : dir_(std::move(dir)) {}

fs::path ArtifactCache::ManifestPath() const { return dir_ / "manifest.txt"; }

std::string ArtifactCache::Lookup(const std::string& source) const {
  std::ifstream in(ManifestPath());
  std::string line;
  std::string found;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    if (line.substr(tab + 1) == source) found = line.substr(0, tab);
  }
  return found;
}

void ArtifactCache::Record(const std::string& source, const std::string& sha) {
  std::ofstream out(ManifestPath(), std::ios::app);
  if (!out) throw AcquisitionError("cannot update " + ManifestPath().string());
  out << sha << '\t' << source << '\n';
}

bool ArtifactCache::Contains(const std::string& source) const {
  const std::string sha = Lookup(source);
  return !sha.empty() && fs::exists(dir_ / sha);
}

std::string ArtifactCache::Fetch(const std::string& source, const std::string& expected_sha256) {
  const std::string sha = Lookup(source);
  if (!sha.empty() && fs::exists(dir_ / sha)) {
    std::string bytes = ReadFileBytes(dir_ / sha);
    const std::string actual = Sha256Hex(bytes);
    if (actual != sha) {
      throw CacheCorruptionError("cached copy of " + source + " has hash " + actual + ", expected " + sha);
    }
    if (!expected_sha256.empty() && actual != expected_sha256) {
      throw CacheCorruptionError("cached copy of " + source + " has hash " + actual + ", expected " +
                                 expected_sha256);
    }
    return bytes;
  }
  std::string bytes = FetchUrl(source);
  const std::string actual = Sha256Hex(bytes);
  if (!expected_sha256.empty() && actual != expected_sha256) {
    throw CacheCorruptionError("download of " + source + " has hash " + actual + ", expected " +
                               expected_sha256);
  }
  fs::create_directories(dir_);
  WriteFileAtomically(dir_ / actual, bytes);
  Record(source, actual);
  return bytes;
}

std::string ReadSource(const DatasetSpec& spec) {
  if (spec.source.empty()) throw AcquisitionError("dataset " + spec.name + " has no source");
  if (IsUrl(spec.source)) {
    ArtifactCache cache(spec.cache_dir.empty() ? DefaultCacheDir() : spec.cache_dir);
    return cache.Fetch(spec.source, spec.sha256);
  }
  std::string bytes = ReadFileBytes(spec.source);
  if (!spec.sha256.empty()) {
    const std::string actual = Sha256Hex(bytes);
    if (actual != spec.sha256) {
      throw CacheCorruptionError(spec.source + " has hash " + actual + ", expected " + spec.sha256);
    }
  }
  return bytes;
}

}  // namespace gbdmap
