#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "rollcard/jsonio.hpp"
#include "rollcard/schema_export.hpp"

using namespace rollcard;

namespace {

// Runs the exported schemas through an independent, standards-compliant
// checker (python-jsonschema) as the oracle.
int check_with_jsonschema(const std::string& def_name,
                          const std::string& instance_json) {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "rollcard-schema-test";
  fs::create_directories(dir);
  {
    std::ofstream schema(dir / "schema.json");
    schema << dump_document(export_row_schemas());
    std::ofstream inst(dir / "instance.json");
    inst << instance_json;
    std::ofstream script(dir / "check.py");
    script << "import json, sys\n"
              "import jsonschema\n"
              "doc = json.load(open(sys.argv[1]))\n"
              "inst = json.load(open(sys.argv[2]))\n"
              "schema = dict(doc['$defs'][sys.argv[3]])\n"
              "schema['$defs'] = doc['$defs']\n"
              "try:\n"
              "    jsonschema.validate(inst, schema)\n"
              "except jsonschema.ValidationError:\n"
              "    sys.exit(3)\n"
              "sys.exit(0)\n";
  }
  std::string cmd = "python3 " + (dir / "check.py").string() + " " +
                    (dir / "schema.json").string() + " " +
                    (dir / "instance.json").string() + " " + def_name +
                    " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("export contains exactly the five stream schemas plus manifest") {
  Json doc = export_row_schemas();
  REQUIRE(doc.contains("$defs"));
  const Json& defs = doc.at("$defs");
  CHECK(defs.size() == 6);
  for (const char* name :
       {"events", "nodes", "edges", "annotations", "mutations", "manifest"}) {
    CHECK(defs.contains(name));
  }
}

TEST_CASE("export is stable across runs") {
  CHECK(dump_document(export_row_schemas()) ==
        dump_document(export_row_schemas()));
}

TEST_CASE("schemas keep the extras-tolerance rule") {
  Json doc = export_row_schemas();
  for (const char* name : {"events", "nodes", "edges", "annotations",
                           "mutations"}) {
    CHECK(doc["$defs"][name]["additionalProperties"] == true);
  }
}

TEST_CASE("independent schema checker accepts the minimal event line") {
  int rc = check_with_jsonschema(
      "events",
      R"({"event_id":"e1","task_execution_id":"x1","worker_binding_key":"w1","sequence":0,"event_type":"message","payload":{}})");
  CHECK(rc == 0);
}

TEST_CASE("independent schema checker rejects the blocked-edge line") {
  int rc = check_with_jsonschema(
      "edges",
      R"({"source_node_id":"a","target_node_id":"b","status":"blocked","created_at":"2026-01-01T00:00:00.000Z","updated_at":"2026-01-01T00:00:00.000Z"})");
  CHECK(rc == 3);
}

TEST_CASE("independent schema checker tolerates unknown columns") {
  int rc = check_with_jsonschema(
      "events",
      R"({"event_id":"e1","task_execution_id":"x1","worker_binding_key":"w1","sequence":0,"event_type":"message","payload":{},"x_custom":7})");
  CHECK(rc == 0);
}
