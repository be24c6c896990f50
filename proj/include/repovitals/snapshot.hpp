#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "repovitals/csv.hpp"
#include "repovitals/error.hpp"
#include "repovitals/time.hpp"

namespace repovitals {

// ---------------------------------------------------------------------------
// Canonical repository snapshot: the unit of ingestion. Immutable once
// written; all timestamps are UTC epoch seconds.
// ---------------------------------------------------------------------------

enum class OwnerKind { user, organization };

inline const char* owner_kind_name(OwnerKind k) {
  return k == OwnerKind::user ? "user" : "organization";
}

struct CommitEvent {
  std::string author_id;
  UnixTime timestamp = 0;
  bool operator==(const CommitEvent&) const = default;
};

struct IssueEvent {
  std::string author_id;
  UnixTime opened_at = 0;
  std::optional<UnixTime> closed_at;
  bool operator==(const IssueEvent&) const = default;
};

struct PullEvent {
  std::string author_id;
  UnixTime opened_at = 0;
  std::optional<UnixTime> closed_at;
  std::optional<UnixTime> merged_at;
  bool operator==(const PullEvent&) const = default;
};

struct ForkEvent {
  UnixTime created_at = 0;
  bool operator==(const ForkEvent&) const = default;
};

struct OwnerStats {
  std::int64_t projects_created = 0;
  std::int64_t owner_commit_count = 0;
  bool operator==(const OwnerStats&) const = default;
};

struct RepoSnapshot {
  std::string owner_login;
  std::string repo_name;
  OwnerKind owner_kind = OwnerKind::user;
  std::string primary_language;
  std::optional<std::string> domain_label;
  std::int64_t star_count = 0;
  std::int64_t size_loc = 0;
  std::vector<CommitEvent> commits;
  std::vector<IssueEvent> issues;
  std::vector<PullEvent> pulls;
  std::vector<ForkEvent> forks;
  std::vector<UnixTime> releases;
  OwnerStats owner_stats;
  std::vector<std::string> repo_files;  // paths at root and .github/
  std::vector<std::string> labels;      // issue label names
  std::optional<std::string> homepage_url;
  std::string readme_text;
  UnixTime fetched_at = 0;

  bool operator==(const RepoSnapshot&) const = default;

  std::string id() const { return owner_login + "/" + repo_name; }
};

// Sorts all event lists into their canonical order. Fetch order from the API
// is not stable, so snapshots are canonicalized before persisting.
inline void canonicalize(RepoSnapshot& s) {
  std::sort(s.commits.begin(), s.commits.end(), [](const auto& a, const auto& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp
                                      : a.author_id < b.author_id;
  });
  std::sort(s.issues.begin(), s.issues.end(), [](const auto& a, const auto& b) {
    return a.opened_at < b.opened_at;
  });
  std::sort(s.pulls.begin(), s.pulls.end(), [](const auto& a, const auto& b) {
    return a.opened_at < b.opened_at;
  });
  std::sort(s.forks.begin(), s.forks.end(), [](const auto& a, const auto& b) {
    return a.created_at < b.created_at;
  });
  std::sort(s.releases.begin(), s.releases.end());
  std::sort(s.repo_files.begin(), s.repo_files.end());
  std::sort(s.labels.begin(), s.labels.end());
}

// Throws Errc::malformed naming the offending field on any invariant breach.
inline void validate_snapshot(const RepoSnapshot& s) {
  auto fail = [&](const std::string& field, const std::string& why) {
    throw Error(Errc::malformed, s.id() + ": field '" + field + "' " + why);
  };
  if (s.owner_login.empty()) fail("owner_login", "is empty");
  if (s.repo_name.empty()) fail("repo_name", "is empty");
  if (s.star_count < 0) fail("star_count", "is negative");
  if (s.size_loc < 0) fail("size_loc", "is negative");
  if (s.owner_stats.projects_created < 0)
    fail("owner_stats.projects_created", "is negative");
  if (s.owner_stats.owner_commit_count < 0)
    fail("owner_stats.owner_commit_count", "is negative");
  for (std::size_t i = 0; i < s.commits.size(); ++i) {
    if (s.commits[i].timestamp > s.fetched_at)
      fail("commits.timestamp", "is after fetched_at");
    if (i > 0 && s.commits[i].timestamp < s.commits[i - 1].timestamp)
      fail("commits", "is not sorted ascending by timestamp");
  }
  for (const auto& e : s.issues) {
    if (e.opened_at > s.fetched_at) fail("issues.opened_at", "is after fetched_at");
    if (e.closed_at) {
      if (*e.closed_at < e.opened_at) fail("issues.closed_at", "is before opened_at");
      if (*e.closed_at > s.fetched_at) fail("issues.closed_at", "is after fetched_at");
    }
  }
  for (const auto& e : s.pulls) {
    if (e.opened_at > s.fetched_at) fail("pulls.opened_at", "is after fetched_at");
    if (e.closed_at && *e.closed_at < e.opened_at)
      fail("pulls.closed_at", "is before opened_at");
    if (e.merged_at && !e.closed_at)
      fail("pulls.merged_at", "is set while closed_at is missing");
    if (e.closed_at && *e.closed_at > s.fetched_at)
      fail("pulls.closed_at", "is after fetched_at");
    if (e.merged_at && *e.merged_at > s.fetched_at)
      fail("pulls.merged_at", "is after fetched_at");
  }
  for (const auto& e : s.forks)
    if (e.created_at > s.fetched_at) fail("forks.created_at", "is after fetched_at");
  for (const auto t : s.releases)
    if (t > s.fetched_at) fail("releases", "is after fetched_at");
}

// --- JSON persistence (file schema version 1) ------------------------------

inline nlohmann::json snapshot_to_json(const RepoSnapshot& s) {
  nlohmann::json j;
  j["schema"] = 1;
  j["owner_login"] = s.owner_login;
  j["repo_name"] = s.repo_name;
  j["owner_kind"] = owner_kind_name(s.owner_kind);
  j["primary_language"] = s.primary_language;
  j["domain_label"] = s.domain_label ? nlohmann::json(*s.domain_label)
                                     : nlohmann::json(nullptr);
  j["star_count"] = s.star_count;
  j["size_loc"] = s.size_loc;
  auto commits = nlohmann::json::array();
  for (const auto& c : s.commits)
    commits.push_back({{"author_id", c.author_id},
                       {"timestamp", format_iso8601(c.timestamp)}});
  j["commits"] = std::move(commits);
  auto issues = nlohmann::json::array();
  for (const auto& e : s.issues) {
    nlohmann::json o{{"author_id", e.author_id},
                     {"opened_at", format_iso8601(e.opened_at)}};
    o["closed_at"] = e.closed_at ? nlohmann::json(format_iso8601(*e.closed_at))
                                 : nlohmann::json(nullptr);
    issues.push_back(std::move(o));
  }
  j["issues"] = std::move(issues);
  auto pulls = nlohmann::json::array();
  for (const auto& e : s.pulls) {
    nlohmann::json o{{"author_id", e.author_id},
                     {"opened_at", format_iso8601(e.opened_at)}};
    o["closed_at"] = e.closed_at ? nlohmann::json(format_iso8601(*e.closed_at))
                                 : nlohmann::json(nullptr);
    o["merged_at"] = e.merged_at ? nlohmann::json(format_iso8601(*e.merged_at))
                                 : nlohmann::json(nullptr);
    pulls.push_back(std::move(o));
  }
  j["pulls"] = std::move(pulls);
  auto forks = nlohmann::json::array();
  for (const auto& e : s.forks)
    forks.push_back({{"created_at", format_iso8601(e.created_at)}});
  j["forks"] = std::move(forks);
  auto releases = nlohmann::json::array();
  for (const auto t : s.releases) releases.push_back(format_iso8601(t));
  j["releases"] = std::move(releases);
  j["owner_stats"] = {{"projects_created", s.owner_stats.projects_created},
                      {"owner_commit_count", s.owner_stats.owner_commit_count}};
  j["repo_files"] = s.repo_files;
  j["labels"] = s.labels;
  j["homepage_url"] = s.homepage_url ? nlohmann::json(*s.homepage_url)
                                     : nlohmann::json(nullptr);
  j["readme_text"] = s.readme_text;
  j["fetched_at"] = format_iso8601(s.fetched_at);
  return j;
}

inline RepoSnapshot snapshot_from_json(const nlohmann::json& j) {
  auto require = [&](const char* key) -> const nlohmann::json& {
    auto it = j.find(key);
    if (it == j.end())
      throw Error(Errc::malformed, std::string("snapshot missing field '") + key + "'");
    return *it;
  };
  if (require("schema").get<int>() != 1)
    throw Error(Errc::malformed, "unsupported snapshot schema");
  RepoSnapshot s;
  s.owner_login = require("owner_login").get<std::string>();
  s.repo_name = require("repo_name").get<std::string>();
  const std::string kind = require("owner_kind").get<std::string>();
  if (kind == "user")
    s.owner_kind = OwnerKind::user;
  else if (kind == "organization")
    s.owner_kind = OwnerKind::organization;
  else
    throw Error(Errc::malformed, "owner_kind '" + kind + "' is not valid");
  s.primary_language = require("primary_language").get<std::string>();
  const auto& dom = require("domain_label");
  if (!dom.is_null()) s.domain_label = dom.get<std::string>();
  s.star_count = require("star_count").get<std::int64_t>();
  s.size_loc = require("size_loc").get<std::int64_t>();
  for (const auto& c : require("commits")) {
    s.commits.push_back({c.at("author_id").get<std::string>(),
                         parse_iso8601_or_throw(
                             c.at("timestamp").get<std::string>(), "commits")});
  }
  for (const auto& e : require("issues")) {
    IssueEvent ev;
    ev.author_id = e.at("author_id").get<std::string>();
    ev.opened_at =
        parse_iso8601_or_throw(e.at("opened_at").get<std::string>(), "issues");
    if (!e.at("closed_at").is_null())
      ev.closed_at = parse_iso8601_or_throw(
          e.at("closed_at").get<std::string>(), "issues");
    s.issues.push_back(ev);
  }
  for (const auto& e : require("pulls")) {
    PullEvent ev;
    ev.author_id = e.at("author_id").get<std::string>();
    ev.opened_at =
        parse_iso8601_or_throw(e.at("opened_at").get<std::string>(), "pulls");
    if (!e.at("closed_at").is_null())
      ev.closed_at =
          parse_iso8601_or_throw(e.at("closed_at").get<std::string>(), "pulls");
    if (!e.at("merged_at").is_null())
      ev.merged_at =
          parse_iso8601_or_throw(e.at("merged_at").get<std::string>(), "pulls");
    s.pulls.push_back(ev);
  }
  for (const auto& e : require("forks"))
    s.forks.push_back({parse_iso8601_or_throw(
        e.at("created_at").get<std::string>(), "forks")});
  for (const auto& t : require("releases"))
    s.releases.push_back(parse_iso8601_or_throw(t.get<std::string>(), "releases"));
  const auto& os = require("owner_stats");
  s.owner_stats.projects_created = os.at("projects_created").get<std::int64_t>();
  s.owner_stats.owner_commit_count =
      os.at("owner_commit_count").get<std::int64_t>();
  s.repo_files = require("repo_files").get<std::vector<std::string>>();
  s.labels = require("labels").get<std::vector<std::string>>();
  const auto& hp = require("homepage_url");
  if (!hp.is_null()) s.homepage_url = hp.get<std::string>();
  s.readme_text = require("readme_text").get<std::string>();
  s.fetched_at =
      parse_iso8601_or_throw(require("fetched_at").get<std::string>(), "fetched_at");
  return s;
}

inline std::string snapshot_filename(const std::string& owner,
                                     const std::string& name) {
  return owner + "__" + name + ".snapshot.json";
}

// Writes one self-describing JSON document per repository. Serialization is
// canonical (sorted keys, fixed indentation), so a loaded snapshot rewrites
// to identical bytes.
inline std::filesystem::path save_snapshot(const RepoSnapshot& s,
                                           const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto path = dir / snapshot_filename(s.owner_login, s.repo_name);
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << snapshot_to_json(s).dump(2) << '\n';
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
  return path;
}

inline RepoSnapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed, path.string() + ": " + e.what());
  }
  RepoSnapshot s;
  try {
    s = snapshot_from_json(j);
    validate_snapshot(s);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
  return s;
}

// --- Corpus -----------------------------------------------------------------

enum class CorpusLabel { active, unmaintained, unlabeled };

inline const char* corpus_label_name(CorpusLabel l) {
  switch (l) {
    case CorpusLabel::active: return "active";
    case CorpusLabel::unmaintained: return "unmaintained";
    case CorpusLabel::unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

inline CorpusLabel parse_corpus_label(const std::string& s) {
  if (s == "active") return CorpusLabel::active;
  if (s == "unmaintained") return CorpusLabel::unmaintained;
  if (s == "unlabeled") return CorpusLabel::unlabeled;
  throw Error(Errc::malformed, "label '" + s + "' is not active|unmaintained|unlabeled");
}

struct CorpusEntry {
  RepoSnapshot snapshot;
  CorpusLabel label = CorpusLabel::unlabeled;
};

using Corpus = std::vector<CorpusEntry>;

// Manifest format: CSV with header "owner,name,label".
inline std::unordered_map<std::string, CorpusLabel> load_manifest(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
  std::unordered_map<std::string, CorpusLabel> labels;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv_split(line);
    if (header) {
      if (fields.size() < 3 || fields[0] != "owner" || fields[1] != "name" ||
          fields[2] != "label")
        throw Error(Errc::malformed,
                    path.string() + ": manifest header must be owner,name,label");
      header = false;
      continue;
    }
    if (fields.size() < 3)
      throw Error(Errc::malformed, path.string() + ": short manifest row '" + line + "'");
    try {
      labels[fields[0] + "/" + fields[1]] = parse_corpus_label(fields[2]);
    } catch (const Error& e) {
      throw Error(Errc::malformed, path.string() + ": " + e.what());
    }
  }
  return labels;
}

inline void write_manifest(const Corpus& corpus,
                           const std::filesystem::path& path) {
  CsvWriter w(path);
  w.row({"owner", "name", "label"});
  for (const auto& e : corpus)
    w.row({e.snapshot.owner_login, e.snapshot.repo_name,
           corpus_label_name(e.label)});
}

// Loads every snapshot in a directory (or the snapshots named by a manifest
// file), validating invariants and attaching manifest labels when present.
inline Corpus load_corpus(const std::filesystem::path& dir_or_manifest) {
  namespace fs = std::filesystem;
  if (!fs::exists(dir_or_manifest))
    throw Error(Errc::io_error, dir_or_manifest.string() + " does not exist");

  fs::path dir = dir_or_manifest;
  std::unordered_map<std::string, CorpusLabel> labels;
  std::vector<fs::path> files;

  if (fs::is_directory(dir_or_manifest)) {
    const auto manifest = dir / "manifest.csv";
    if (fs::exists(manifest)) labels = load_manifest(manifest);
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto name = entry.path().filename().string();
      if (name.size() > 14 &&
          name.substr(name.size() - 14) == ".snapshot.json")
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    dir = dir_or_manifest.parent_path();
    labels = load_manifest(dir_or_manifest);
    std::vector<std::pair<std::string, CorpusLabel>> ordered(labels.begin(),
                                                             labels.end());
    std::sort(ordered.begin(), ordered.end());
    for (const auto& [id, label] : ordered) {
      const auto slash = id.find('/');
      files.push_back(dir / snapshot_filename(id.substr(0, slash),
                                              id.substr(slash + 1)));
    }
  }

  Corpus corpus;
  corpus.reserve(files.size());
  for (const auto& f : files) {
    CorpusEntry e;
    e.snapshot = load_snapshot(f);
    const auto it = labels.find(e.snapshot.id());
    e.label = it == labels.end() ? CorpusLabel::unlabeled : it->second;
    corpus.push_back(std::move(e));
  }
  return corpus;
}

// Point-in-time reconstruction: drops every event after `when` and moves the
// observation time back, yielding the repository state as of that date.
inline RepoSnapshot as_of(const RepoSnapshot& s, UnixTime when) {
  RepoSnapshot out = s;
  out.fetched_at = when;
  std::erase_if(out.commits, [&](const auto& c) { return c.timestamp > when; });
  std::erase_if(out.issues, [&](const auto& e) { return e.opened_at > when; });
  for (auto& e : out.issues)
    if (e.closed_at && *e.closed_at > when) e.closed_at.reset();
  std::erase_if(out.pulls, [&](const auto& e) { return e.opened_at > when; });
  for (auto& e : out.pulls) {
    if (e.merged_at && *e.merged_at > when) e.merged_at.reset();
    if (e.closed_at && *e.closed_at > when) {
      e.closed_at.reset();
      e.merged_at.reset();
    }
  }
  std::erase_if(out.forks, [&](const auto& e) { return e.created_at > when; });
  std::erase_if(out.releases, [&](const UnixTime t) { return t > when; });
  return out;
}

}  // namespace repovitals
