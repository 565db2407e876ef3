#include "rollcard/bundle.hpp"

#include "rollcard/jsonio.hpp"

namespace rollcard {

template <>
EventRow RowStream<EventRow>::parse_line(std::string_view line) {
  return parse_event_row(line);
}
template <>
NodeRow RowStream<NodeRow>::parse_line(std::string_view line) {
  return parse_node_row(line);
}
template <>
EdgeRow RowStream<EdgeRow>::parse_line(std::string_view line) {
  return parse_edge_row(line);
}
template <>
AnnotationRow RowStream<AnnotationRow>::parse_line(std::string_view line) {
  return parse_annotation_row(line);
}
template <>
MutationRow RowStream<MutationRow>::parse_line(std::string_view line) {
  return parse_mutation_row(line);
}

std::string serialize_stream(const CardBundle& card, StreamKind kind) {
  std::string out;
  auto append = [&out](const auto& stream) {
    stream.for_each([&out](const auto& row) {
      out += serialize_row(row);
      out.push_back('\n');
    });
  };
  switch (kind) {
    case StreamKind::Events: append(card.streams.events); break;
    case StreamKind::Nodes: append(card.streams.nodes); break;
    case StreamKind::Edges: append(card.streams.edges); break;
    case StreamKind::Annotations: append(card.streams.annotations); break;
    case StreamKind::Mutations: append(card.streams.mutations); break;
  }
  return out;
}

namespace {

void collect_blob_refs(const Json& value, std::vector<BlobRef>& out) {
  if (value.is_object()) {
    if (value.contains("$blob") && value.at("$blob").is_object()) {
      const Json& b = value.at("$blob");
      if (b.contains("digest") && b.at("digest").is_string()) {
        BlobRef ref;
        ref.digest = b.at("digest").get<std::string>();
        ref.byte_length = b.value("byte_length", std::uint64_t{0});
        if (b.contains("media_type") && b.at("media_type").is_string()) {
          ref.media_type = b.at("media_type").get<std::string>();
        }
        out.push_back(std::move(ref));
      }
    }
    for (const auto& [key, child] : value.items()) {
      (void)key;
      collect_blob_refs(child, out);
    }
  } else if (value.is_array()) {
    for (const auto& child : value) collect_blob_refs(child, out);
  }
}

}  // namespace

std::vector<BlobRef> find_blob_refs(const rawjson::RawValue& payload) {
  std::vector<BlobRef> refs;
  Json j = Json::parse(payload.text, nullptr, false);
  if (!j.is_discarded()) collect_blob_refs(j, refs);
  return refs;
}

std::string blob_ref_payload(const BlobRef& ref) {
  Json b = Json::object();
  b["digest"] = ref.digest;
  b["byte_length"] = ref.byte_length;
  if (ref.media_type) b["media_type"] = *ref.media_type;
  Json payload = Json::object();
  payload["$blob"] = std::move(b);
  return payload.dump();
}

std::vector<NodeRow> root_nodes(const CardBundle& card) {
  std::vector<NodeRow> roots;
  for (const NodeRow& node : card.streams.nodes.rows()) {
    if (node.level == 0 && !node.parent_id) roots.push_back(node);
  }
  return roots;
}

}  // namespace rollcard
