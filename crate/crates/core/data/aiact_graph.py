"""Generates aiact_graph.json. Run from this directory: python3 aiact_graph.py"""
import json

VERBATIM = "question and options transcribed verbatim from the published two-stage prompt"
PARTIAL = "question text and the first/last options are verbatim; middle options reconstructed from the official checker"
RECON = "reconstructed from the official EU AI Act Compliance Checker question flow"


def q(qid, text, options, provenance, background=None, nota=True):
    d = {"id": qid, "text": text, "provenance": provenance}
    if background:
        d["background"] = background
    opts = [{"index": i + 1, "label": label, "next": nxt} for i, (label, nxt) in enumerate(options)]
    if nota:
        d["nota_index"] = len(opts)
    d["options"] = opts
    return d


questions = [
    q("question_1", "Which kind of entity is your organisation?", [
        ("Provider", "q:question_2"),
        ("Deployer", "q:question_3"),
        ("Distributor", "q:question_3"),
        ("Importer", "q:question_3"),
        ("Product manufacturer", "q:question_3"),
        ("Authorised representative", "q:question_3"),
    ], VERBATIM, background=(
        "Definitions:\n"
        "Provider: a natural or legal person, public authority, agency or other body that develops an AI system or a "
        "general purpose AI model (or that has an AI system or a general purpose AI model developed) and places them "
        "on the market or puts the system into service under its own name or trademark, whether for payment or free "
        "of charge;\n"
        "Deployer: any natural or legal person, public authority, agency or other body using an AI system under its "
        "authority except where the AI system is used in the course of a personal non-professional activity;\n"
        "Distributor: any natural or legal person in the supply chain, other than the provider or the importer, that "
        "makes an AI system available on the Union market;\n"
        "Importer: any natural or legal person located or established in the Union that places on the market an AI "
        "system that bears the name or trademark of a natural or legal person established in a third country;\n"
        "Product manufacturer: places on the market or puts into service an AI system together with their product "
        "and under their own name or trademark;\n"
        "Authorised representative: any natural or legal person located or established in the Union who has received "
        "and accepted a written mandate from a provider of an AI system or a general-purpose AI model to, "
        "respectively, perform and carry out on its behalf the obligations and procedures established by this "
        "Regulation."
    ), nota=False),
    q("question_2", "Has a downstream deployer, distributer, or importer made any of the following modifications to "
                    "your system?", [
        ("Putting a different name/trademark on the system", "q:question_3"),
        ("Modifying the intended purpose of a system already in operation", "q:question_3"),
        ("Performing a substantial modification (see Article 3 point 23) to the system", "q:question_3"),
        ("None of the above", "q:question_3"),
    ], VERBATIM, background=(
        "Substantial modification: a change to an AI system after its placing on the market or putting into service "
        "which is not foreseen or planned in the initial conformity assessment carried out by the provider and as a "
        "result of which the compliance of the AI system with the requirements set out in Chapter III, Section 2 is "
        "affected or results in a modification to the intended purpose for which the AI system has been assessed. "
        "Any distributor, importer, deployer or other third-party shall be considered to be a provider of a high-risk "
        "AI system if they put their name or trademark on it, make a substantial modification to it, or modify its "
        "intended purpose (Article 25(1))."
    )),
    q("question_3", "Which of the following best describes what your organisation places on the market, puts into "
                    "service or uses?", [
        ("An AI system", "q:question_4"),
        ("An AI system that integrates a general-purpose AI model", "q:question_4"),
        ("A general-purpose AI model", "leaf:gpai_model"),
    ], RECON, background=(
        "AI system: a machine-based system that is designed to operate with varying levels of autonomy and that may "
        "exhibit adaptiveness after deployment, and that, for explicit or implicit objectives, infers, from the input "
        "it receives, how to generate outputs such as predictions, content, recommendations, or decisions that can "
        "influence physical or virtual environments.\n"
        "General-purpose AI model: an AI model, including where such an AI model is trained with a large amount of "
        "data using self-supervision at scale, that displays significant generality and is capable of competently "
        "performing a wide range of distinct tasks regardless of the way the model is placed on the market and that "
        "can be integrated into a variety of downstream systems or applications, except AI models that are used for "
        "research, development or prototyping activities before they are placed on the market."
    ), nota=False),
    q("question_4", "Which of the following statements about the territorial reach of your system apply?", [
        ("The system is placed on the market or put into service in the European Union", "q:question_5"),
        ("The deployer of the system is established or located within the European Union", "q:question_5"),
        ("The output produced by the system is used in the European Union", "q:question_5"),
        ("None of the above", "leaf:out_of_territorial_scope"),
    ], RECON, background=(
        "Placing on the market: the first making available of an AI system or a general-purpose AI model on the "
        "Union market. Putting into service: the supply of an AI system for first use directly to the deployer or for "
        "own use in the Union for its intended purpose. The Regulation also applies to providers and deployers of AI "
        "systems that have their place of establishment or are located in a third country, where the output produced "
        "by the AI system is used in the Union (Article 2(1)(c))."
    )),
    q("question_5", "Is your system developed or used exclusively for any of the following purposes?", [
        ("Military, defence or national security purposes", "leaf:excluded_purpose"),
        ("Scientific research and development as its sole purpose", "leaf:excluded_purpose"),
        ("Research, testing or development activity prior to being placed on the market or put into service",
         "leaf:excluded_purpose"),
        ("A purely personal non-professional activity of a natural person", "leaf:excluded_purpose"),
        ("Release under a free and open-source licence, without being a prohibited, high-risk or transparency-"
         "relevant system", "leaf:excluded_purpose"),
        ("None of the above", "q:question_6"),
    ], RECON, background=(
        "Exclusions from scope: the Regulation does not apply to AI systems placed on the market, put into service, "
        "or used with or without modification exclusively for military, defence or national security purposes "
        "(Article 2(3)); to AI systems or models specifically developed and put into service for the sole purpose of "
        "scientific research and development (Article 2(6)); to research, testing or development activity regarding "
        "AI systems or models prior to their being placed on the market or put into service (Article 2(8)); to "
        "obligations of deployers who are natural persons using AI systems in the course of a purely personal "
        "non-professional activity (Article 2(10)); and to AI systems released under free and open-source licences, "
        "unless they are placed on the market or put into service as high-risk AI systems or as an AI system that "
        "falls under Article 5 or 50 (Article 2(12))."
    )),
    q("question_6", "Does your AI system perform any of the following practices?", [
        ("Deploying subliminal, manipulative or deceptive techniques that materially distort behaviour and cause "
         "significant harm", "leaf:prohibited_manipulation"),
        ("Exploiting vulnerabilities due to age, disability or a specific social or economic situation",
         "leaf:prohibited_exploitation"),
        ("Social scoring leading to detrimental or unfavourable treatment", "leaf:prohibited_social_scoring"),
        ("Assessing the risk of a natural person committing a criminal offence based solely on profiling or "
         "personality traits", "leaf:prohibited_predictive_policing"),
        ("Creating or expanding facial recognition databases through untargeted scraping of facial images",
         "leaf:prohibited_face_scraping"),
        ("Inferring emotions of a natural person in the workplace or in education institutions",
         "leaf:prohibited_emotion_recognition"),
        ("Biometric categorisation to deduce race, political opinions, trade union membership, religious or "
         "philosophical beliefs, sex life or sexual orientation", "leaf:prohibited_biometric_categorisation"),
        ("Real-time remote biometric identification in publicly accessible spaces for law enforcement",
         "leaf:prohibited_realtime_biometric_id"),
        ("None of the above", "q:question_7"),
    ], RECON, background=(
        "Prohibited AI practices (Article 5(1)): the placing on the market, the putting into service or the use of "
        "an AI system that deploys subliminal techniques beyond a person's consciousness or purposefully "
        "manipulative or deceptive techniques; that exploits any of the vulnerabilities of a natural person or a "
        "specific group of persons; for the evaluation or classification of natural persons or groups of persons "
        "over a certain period of time based on their social behaviour or known, inferred or predicted personal or "
        "personality characteristics, with the social score leading to detrimental or unfavourable treatment; for "
        "making risk assessments of natural persons in order to assess or predict the risk of a natural person "
        "committing a criminal offence, based solely on the profiling of a natural person or on assessing their "
        "personality traits and characteristics; that creates or expands facial recognition databases through the "
        "untargeted scraping of facial images from the internet or CCTV footage; to infer emotions of a natural "
        "person in the areas of workplace and education institutions, except where intended for medical or safety "
        "reasons; biometric categorisation systems that categorise individually natural persons based on their "
        "biometric data to deduce or infer sensitive attributes; and the use of real-time remote biometric "
        "identification systems in publicly accessible spaces for the purposes of law enforcement, unless strictly "
        "necessary for narrowly defined objectives."
    )),
    q("question_7", "Is your AI system intended to be used in any of the following areas?", [
        ("Biometrics: remote biometric identification, biometric categorisation or emotion recognition",
         "q:question_8"),
        ("Critical infrastructure: safety components in the management and operation of critical digital "
         "infrastructure, road traffic, or the supply of water, gas, heating or electricity", "q:question_8"),
        ("Education and vocational training: access, admission, evaluation of learning outcomes or monitoring of "
         "students", "q:question_8"),
        ("Employment, workers management and access to self-employment: recruitment, selection, promotion, "
         "termination, task allocation or monitoring", "q:question_8"),
        ("Access to and enjoyment of essential private and public services: public benefits, creditworthiness, "
         "life and health insurance pricing, emergency call triage", "q:question_8"),
        ("Law enforcement: victim risk assessment, polygraphs, evidence reliability, offending risk, profiling",
         "q:question_8"),
        ("Migration, asylum and border control management", "q:question_8"),
        ("Administration of justice and democratic processes, including influencing elections", "q:question_8"),
        ("None of the above", "q:question_10"),
    ], RECON, background=(
        "High-risk areas listed in Annex III. An AI system referred to in Annex III shall be considered to be "
        "high-risk (Article 6(2)). The areas cover biometrics, in so far as their use is permitted under relevant "
        "Union or national law; critical infrastructure; education and vocational training; employment, workers "
        "management and access to self-employment; access to and enjoyment of essential private services and "
        "essential public services and benefits; law enforcement; migration, asylum and border control management; "
        "and administration of justice and democratic processes."
    )),
    q("question_8", "Does your AI system, used in an Annex III area, meet any of the following conditions without "
                    "performing profiling of natural persons?", [
        ("It is intended to perform a narrow procedural task", "q:question_9"),
        ("It is intended to improve the result of a previously completed human activity", "q:question_9"),
        ("It is intended to detect decision-making patterns or deviations from prior decision-making patterns and "
         "is not meant to replace or influence the previously completed human assessment without proper human "
         "review", "q:question_9"),
        ("It is intended to perform a preparatory task to an assessment relevant for the Annex III use cases",
         "q:question_9"),
        ("None of the above", "leaf:high_risk_annex_iii"),
    ], RECON, background=(
        "Derogation (Article 6(3)): an AI system referred to in Annex III shall not be considered to be high-risk "
        "where it does not pose a significant risk of harm to the health, safety or fundamental rights of natural "
        "persons, including by not materially influencing the outcome of decision making, where one or more of the "
        "listed conditions is fulfilled. Notwithstanding this, an AI system referred to in Annex III shall always be "
        "considered to be high-risk where the AI system performs profiling of natural persons. A provider who "
        "considers that an AI system referred to in Annex III is not high-risk shall document its assessment before "
        "that system is placed on the market or put into service."
    )),
    q("question_9", "Does your AI system do any of the following?", [
        ("Interact directly with natural persons", "leaf:transparency_obligations"),
        ("Generate synthetic audio, image, video or text content", "leaf:transparency_obligations"),
        ("Perform emotion recognition or biometric categorisation", "leaf:transparency_obligations"),
        ("Generate or manipulate image, audio or video content constituting a deep fake",
         "leaf:transparency_obligations"),
        ("Generate or manipulate text published with the purpose of informing the public on matters of public "
         "interest", "leaf:transparency_obligations"),
        ("None of the above", "leaf:minimal_risk"),
    ], RECON, background=(
        "Transparency obligations (Article 50): providers shall ensure that AI systems intended to interact directly "
        "with natural persons are designed and developed in such a way that the natural persons concerned are "
        "informed that they are interacting with an AI system, unless this is obvious from the context; providers "
        "of AI systems generating synthetic audio, image, video or text content shall ensure that the outputs are "
        "marked in a machine-readable format and detectable as artificially generated or manipulated; deployers of "
        "an emotion recognition system or a biometric categorisation system shall inform the natural persons "
        "exposed thereto of the operation of the system; deployers of an AI system that generates or manipulates "
        "image, audio or video content constituting a deep fake shall disclose that the content has been "
        "artificially generated or manipulated.\n"
        "Deep fake: AI-generated or manipulated image, audio or video content that resembles existing persons, "
        "objects, places, entities or events and would falsely appear to a person to be authentic or truthful."
    )),
    q("question_10", "Does your AI system (or the product for which your AI system is a 'safety component') fall "
                     "within any of the following high-risk categories?", [
        ("Civil aviation security", "leaf:high_risk_annex_i"),
        ("Two- or three-wheel vehicles and quadricycles", "leaf:high_risk_annex_i"),
        ("Agricultural and forestry vehicles", "leaf:high_risk_annex_i"),
        ("Marine equipment", "leaf:high_risk_annex_i"),
        ("Interoperability of the rail system", "leaf:high_risk_annex_i"),
        ("Motor vehicles and their trailers, systems, components and separate technical units", "leaf:high_risk_annex_i"),
        ("Civil aviation, unmanned aircraft and their engines, propellers, parts and equipment",
         "leaf:high_risk_annex_i"),
        ("None of the above", "q:question_9"),
    ], PARTIAL, background=(
        "Safety component: a component of a product or of an AI system which fulfils a safety function for that "
        "product or AI system, or the failure or malfunctioning of which endangers the health and safety of persons "
        "or property. An AI system shall be considered to be high-risk where it is intended to be used as a safety "
        "component of a product, or the AI system is itself a product, covered by the Union harmonisation "
        "legislation listed in Annex I, and the product is required to undergo a third-party conformity assessment "
        "(Article 6(1))."
    )),
]


def leaf(lid, category, label, cited, note):
    return {"id": lid, "category": category, "label_mapping": label, "cited_provisions": cited, "note": note}


leaves = [
    leaf("gpai_model", {"other": "general_purpose_ai_model"}, "permitted", ["Article 53(1)", "Article 55(1)"],
         "Obligations for providers of general-purpose AI models"),
    leaf("out_of_territorial_scope", "out_of_scope", "not_applicable", ["Article 2(1)"],
         "The system has no link to the Union market"),
    leaf("excluded_purpose", "out_of_scope", "not_applicable",
         ["Article 2(3)", "Article 2(6)", "Article 2(8)", "Article 2(10)", "Article 2(12)"],
         "Excluded from the scope of the Regulation"),
    leaf("prohibited_manipulation", "prohibited_practice", "prohibited", ["Article 5(1)(a)"], "Prohibited AI practice"),
    leaf("prohibited_exploitation", "prohibited_practice", "prohibited", ["Article 5(1)(b)"], "Prohibited AI practice"),
    leaf("prohibited_social_scoring", "prohibited_practice", "prohibited", ["Article 5(1)(c)"],
         "Prohibited AI practice"),
    leaf("prohibited_predictive_policing", "prohibited_practice", "prohibited", ["Article 5(1)(d)"],
         "Prohibited AI practice"),
    leaf("prohibited_face_scraping", "prohibited_practice", "prohibited", ["Article 5(1)(e)"], "Prohibited AI practice"),
    leaf("prohibited_emotion_recognition", "prohibited_practice", "prohibited", ["Article 5(1)(f)"],
         "Prohibited AI practice"),
    leaf("prohibited_biometric_categorisation", "prohibited_practice", "prohibited", ["Article 5(1)(g)"],
         "Prohibited AI practice"),
    leaf("prohibited_realtime_biometric_id", "prohibited_practice", "prohibited", ["Article 5(1)(h)"],
         "Prohibited AI practice"),
    leaf("high_risk_annex_iii", "high_risk_obligations", "permitted",
         ["Article 6(2)", "Article 16", "Article 26"], "High-risk AI system (Annex III area)"),
    leaf("high_risk_annex_i", "high_risk_obligations", "permitted", ["Article 6(1)", "Article 16", "Article 26"],
         "High-risk AI system (Annex I product legislation)"),
    leaf("transparency_obligations", "transparency_obligations", "permitted", ["Article 50"],
         "Transparency obligations apply"),
    leaf("minimal_risk", "minimal_risk", "permitted", [], "Minimal risk; voluntary codes of conduct"),
]

graph = {"version": "eu-ai-act-checker-1", "root": "question_1", "questions": questions, "leaves": leaves}

with open("aiact_graph.json", "w") as f:
    json.dump(graph, f, indent=2, ensure_ascii=False)
    f.write("\n")
