"""Surface-syntax corpus: the worked examples this dialect must accept.

Elisions ("...") in the sources are completed minimally; string contents
keep their original text. MUTANTS are hand-broken variants that must be
rejected with a located diagnostic.
"""

SNIPPETS = {
    "knowledge_extraction": '''
@gpt("The height of {{x}} is {{y}} in meters")
type height(bound x: String, y: i32)

// Retrieving height of mountains
rel mount_height(m, h) = mountain(m) and height(m, h)
''',
    "image_classification": '''
@clip(["cat", "dog"])
type classify(bound img: Tensor, label: String)

// Classify each image as cat or dog
rel cat_or_dog(i, l) = image(i, m) and classify(m, l)
''',
    "image_relation_decl": '''
type image(img_id: i32, img: Tensor)
''',
    "image_facts": '''
rel image = {(0, $load_image("cat.png"))}
''',
    "query_dsl_and_const": '''
type Query = Scene() | Filter(Query, String)
           | Count(Query) | Exists(Query)
// How many balls are there?
const MY_QUERY = Count(Filter(Scene(), "ball"))
''',
    "dsl_semantics": '''
// Scene returns all objects
rel eval_o(e, o) = case e is Scene() and obj(o)
// Filter applies filter using attributes
rel eval_o(e, o) = case e is Filter(f, a)
    and eval_o(f, o) and attr(o, a)
// Count returns the number of evaluated objects
rel eval_n(e, n) = n := count(o: eval_o(e1, o)
    where e1: case e is Count(e1))
''',
    "probabilistic_facts": '''
rel animal = {0.1::(1,"cat"), 0.9::(1,"dog")}
''',
    "soft_join": '''
type doc(id: i32, embed: Tensor) // embed docs
rel sim(i, j) = doc(i, v) and doc(j, v) and i!=j
rel sim(i, j) = doc(i, v1) and doc(j, v2) and i!=j and v1~=v2
''',
    "text_completion": '''
extern type gpt(bound p: String, a: String)
rel ans(a) = gpt("population of NY is", a)
''',
    "population_attribute": '''
@gpt("the population of {{loc}} is {{num}}",
  examples=[("NY", 8468000)])
type population(bound loc: String, num: u32)
''',
    "semantic_parse_attribute": '''
@gpt_semantic_parse(
  "Please semantically parse questions...",
  examples=[("How many red things are there?",
    "Count(Filter(Scene(), 'red'))")])
type parse_query(bound x: String, y: Query)
''',
    "relation_extraction": '''
@gpt_extract_relation(
  "Extract the implied kinship relations",
  examples=[("Alice and her son Bob went to...",
    [("alice", "bob", "son")])])
type extract_kinship(bound ctx: String,
  sub: String, obj: String, rela: String)
''',
    "cross_encoder": '''
@cross_encoder("nli-deberta-v3-xsmall")
type enc(bound input: String, embed: Tensor)
rel sim() = enc("cat", e) and enc("neko", e)
''',
    "object_localization": '''
@owl_vit(["human face", "rocket"])
type find_obj(bound img: Tensor,
  id: u32, label: String, cropped_image: Tensor)
''',
    "image_generation": '''
@stable_diffusion("stable-diffusion-v1-4")
type gen_image(bound txt: String, img: Tensor)
''',
    "scene_segmentation": '''
@owl_vit(["cube", "sphere", "cylinder"],
  expand_crop_region=10, limit=10,
  flatten_probability=true)
type segment_image(
  bound img: Tensor, id: u32,
  cropped_image: Tensor, area: u32,
  bbox_center_x: u32, bbox_bottom_y: u32)
''',
    "scene_loading": '''
type img_dir(directory: String) // input
rel image($load_image(d)) = img_dir(d) // load
rel obj_seg(id, seg, obj_size, x, y) =
  image(img) and
  segment_image(img, id, seg, obj_size, x, y)
rel obj(id) = obj_seg(id, _, _, _, _)
''',
    "shape_classifier": '''
@clip(["cube", "cylinder", "sphere"],
  prompt="a {{}} shaped object")
type classify_shape(
  bound obj_img: Tensor,
  shape: String)
rel shape(o, s) = obj_seg(o, seg, _, _, _) and
  classify_shape(seg, s)
''',
    "color_classifier": '''
@clip(["red", "blue", "yellow",
  "purple", "gray", "brown", "cyan", "green"],
  prompt="a {{}} colored object")
type classify_color(
  bound obj_img: Tensor,
  color: String)
rel color(o, c) = obj_seg(o, seg, _, _, _) and
  classify_color(seg, c)
''',
    "material_classifier": '''
@clip(["shiny metal", "solid rubber"],
  prompt="object made out of {{}} material")
type classify_material(
  bound obj_img: Tensor,
  material: String)
rel material(o, m) = obj_seg(o, s, _, _, _) and
  classify_material(s, m)
''',
    "probabilistic_size_rule": '''
rel {
  0.9::size(o, if l then "large" else "small");
  0.1::size(o, if !l then "large" else "small")
} = obj_seg(o, _, size, _, _) and l == size > A
''',
    "spatial_relations": '''
rel obj_pos(o, x, y) = obj_seg(o, _, _, x, y)
rel relate(o1, o2, dir) = o1 != o2 and
  obj_pos(o1, x1, _) and obj_pos(o2, x2, _) and
  dir == if x1 < x2 then "left" else "right"
rel relate(o1, o2, dir) = o1 != o2 and
  obj_pos(o1, _, y1) and obj_pos(o2, _, y2) and
  dir == if y1 > y2 then "front" else "behind"
''',
    "full_query_dsl": '''
type Query = Scene()
           | FilterShape(Query, String)
           | FilterMaterial(Query, String)
           | FilterColor(Query, String)
           | FilterSize(Query, String)
           | Relate(Query, String)
           | Count(Query)
           | Exists(Query)
           | GreaterThan(Query, Query)
           | LessThan(Query, Query)
           | Equals(Query, Query)
           | Intersect(Query, Query)
           | Union(Query, Query)
           | SameSize(Query)
           | SameColor(Query)
           | SameMaterial(Query)
           | SameShape(Query)
           | QueryMaterial(Query)
           | QueryColor(Query)
           | QueryShape(Query)
           | QuerySize(Query)
''',
    "semantic_parser_config": '''
@gpt_semantic_parse(
  header="""
Please convert a question into its programmatic
form according to the following language:
Expr = Scene() | FilterShape(Expr, String) | ...

Please pick shapes among \\"cylinder\\", ...;
Colors are among \\"red\\", \\"blue\\", ...;
Materials are among \\"shiny metal\\" and ...;
Sizes are among \\"large\\" and \\"small\\";
Spatial relations are among \\"left\\", ...""",
  prompt="""
Question: {{s}}
Query: {{e}}""",
  examples=[
    ("How many red objects are there?",
     "Count(FilterColor(Scene(), \\"red\\"))"),
    ("Is there a cube?",
     "Exists(FilterShape(Scene(), \\"cube\\"))")],
  model="gpt-4")
type parse_query(bound s: String, q: Query)
''',
    "question_wiring": '''
type question(String) // input question string
rel parsed_query(q) =
    question(s) and parse_query(s, q)
''',
    "eval_obj_semantics": '''
rel eval_obj(e, o) =                    // Scene
    case e is Scene() and object(o)
rel eval_obj(e, o) =              // FilterShape
    case e is FilterShape(e1, s) and
    eval_obj(e1, o) and shape(o, s)
rel eval_obj(e, o) =              // FilterColor
    case e is FilterColor(e1, c) and
    eval_obj(e1, o) and color(o, c)
rel eval_obj(e, o) =           // FilterMaterial
    case e is FilterMaterial(e1, m) and
    eval_obj(e1, o) and material(o, m)
rel eval_obj(e, o) =               // FilterSize
    case e is FilterSize(e1, s) and
    eval_obj(e1, o) and size(o, s)
rel eval_obj(e, p) =                   // Relate
    case e is Relate(e1, dir) and
    eval_obj(e1, o) and relate(p, o, dir)
rel eval_obj(e, p) =                 // SameSize
    case e is SameSize(e1) and
    eval_obj(e1, o) and size(o, s) and
    size(p, s) and o != p
rel eval_obj(e, p) =                // SameColor
    case e is SameColor(e1) and
    eval_obj(e1, o) and color(o, c) and
    color(p, c) and o != p
rel eval_obj(e, p) =             // SameMaterial
    case e is SameMaterial(e1) and
    eval_obj(e1, o) and material(o, m) and
    material(p, m) and o != p
rel eval_obj(e, p) =                // SameShape
    case e is SameShape(e1) and
    eval_obj(e1, o) and shape(o, s) and
    shape(p, s) and o != p
''',
    "eval_bool_semantics": '''
rel eval_bool(e, b) = b := exists(     // Exists
    o: eval_obj(e1, o) where
    e: case e is Exists(e1))
rel eval_bool(e, n1 > n2) =       // GreaterThan
    case e is GreaterThan(e1, e2) and
    eval_num(e1, n1) and eval_num(e2, n2)
rel eval_bool(e, n1 < n2) =          // LessThan
    case e is LessThan(e1, e2) and
    eval_num(e1, n1) and eval_num(e2, n2)
rel eval_bool(e, n1 == n2) =           // Equals
    case e is Equals(e1, e2) and
    eval_num(e1, n1) and eval_num(e2, n2)
''',
    "eval_num_semantics": '''
rel eval_num(e, n) = n := count(        // Count
    o: eval_obj(e1, o) where
    e1: case e is Count(e1))
''',
    "result_wiring": '''
rel result(r as String) =
    parsed_query(q) and eval_num(q, r)
rel result(r as String) =
    parsed_query(q) and eval_bool(q, r)
''',
}

MUTANTS = {
    "unbalanced_head_paren": "rel p(x = q(x)",
    "unterminated_string": 'rel p = {("oops)}',
    "missing_rule_body": "rel p(x) =",
    "bad_probability_tag": "rel animal = {0.1:(1,)}",
    "adt_leading_pipe": "type Query = | Scene()",
    "attribute_missing_name": "@ type p(x: i32)",
    "aggregate_missing_colon": "rel n(c) = c := count(x q(x))",
    "case_without_pattern": "rel p(e) = case e is and q(e)",
    "unclosed_fact_set": "rel p = {(1,), (2,)",
    "keyword_as_relation": "rel type(x) = q(x)",
}
