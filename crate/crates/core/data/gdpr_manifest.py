"""Generates gdpr_manifest.json. Run from this directory: python3 gdpr_manifest.py"""
import json

S9 = "Paragraph 1 shall not apply if one of the following applies: "


def p(article, text, item=None, sub_item=None, title=None, exemption=False):
    d = {"article": article}
    if item is not None:
        d["item"] = item
    if sub_item is not None:
        d["sub_item"] = sub_item
    if title:
        d["title"] = title
    d["text"] = text
    if exemption:
        d["exemption"] = True
    return d


NOT_APPLY = "This Regulation does not apply to the processing of personal data "
APPLY_3_2 = ("This Regulation applies to the processing of personal data of data subjects who are in the Union "
             "by a controller or processor not established in the Union, where the processing activities are related to ")

scope = [
    p("2", "This Regulation applies to the processing of personal data wholly or partly by automated means and to the "
           "processing other than by automated means of personal data which form part of a filing system or are "
           "intended to form part of a filing system.", "1", title="Material scope"),
    p("2", NOT_APPLY + "in the course of an activity which falls outside the scope of Union law.", "2", "a",
      "Material scope", True),
    p("2", NOT_APPLY + "by the Member States when carrying out activities which fall within the scope of Chapter 2 of "
           "Title V of the TEU.", "2", "b", "Material scope", True),
    p("2", NOT_APPLY + "by a natural person in the course of a purely personal or household activity.", "2", "c",
      "Material scope", True),
    p("2", NOT_APPLY + "by competent authorities for the purposes of the prevention, investigation, detection or "
           "prosecution of criminal offences or the execution of criminal penalties, including the safeguarding "
           "against and the prevention of threats to public security.", "2", "d", "Material scope", True),
    p("3", "This Regulation applies to the processing of personal data in the context of the activities of an "
           "establishment of a controller or a processor in the Union, regardless of whether the processing takes "
           "place in the Union or not.", "1", title="Territorial scope"),
    p("3", APPLY_3_2 + "the offering of goods or services, irrespective of whether a payment of the data subject is "
           "required, to such data subjects in the Union.", "2", "a", "Territorial scope"),
    p("3", APPLY_3_2 + "the monitoring of their behaviour as far as their behaviour takes place within the Union.",
      "2", "b", "Territorial scope"),
    p("3", "This Regulation applies to the processing of personal data by a controller not established in the Union, "
           "but in a place where Member State law applies by virtue of public international law.", "3",
      title="Territorial scope"),
]

specials = [
    p("8", "Where point (a) of Article 6(1) applies, in relation to the offer of information society services "
           "directly to a child, the processing of the personal data of a child shall be lawful where the child is at "
           "least 16 years old. Where the child is below the age of 16 years, such processing shall be lawful only if "
           "and to the extent that consent is given or authorised by the holder of parental responsibility over the "
           "child. Member States may provide by law for a lower age for those purposes provided that such lower age "
           "is not below 13 years.", "1", title="Conditions applicable to child's consent"),
    p("8", "The controller shall make reasonable efforts to verify in such cases that consent is given or authorised "
           "by the holder of parental responsibility over the child, taking into consideration available technology.",
      "2", title="Conditions applicable to child's consent"),
    p("9", "Processing of personal data revealing racial or ethnic origin, political opinions, religious or "
           "philosophical beliefs, or trade union membership, and the processing of genetic data, biometric data for "
           "the purpose of uniquely identifying a natural person, data concerning health or data concerning a natural "
           "person's sex life or sexual orientation shall be prohibited.", "1",
      title="Processing of special categories of personal data"),
    p("9", S9 + "(a) the data subject has given explicit consent to the processing of those personal data for one or "
           "more specified purposes; (b) processing is necessary for the purposes of carrying out the obligations and "
           "exercising specific rights of the controller or of the data subject in the field of employment and social "
           "security and social protection law; (c) processing is necessary to protect the vital interests of the "
           "data subject or of another natural person where the data subject is physically or legally incapable of "
           "giving consent; (d) processing is carried out in the course of its legitimate activities with appropriate "
           "safeguards by a foundation, association or any other not-for-profit body with a political, philosophical, "
           "religious or trade union aim; (e) processing relates to personal data which are manifestly made public by "
           "the data subject; (f) processing is necessary for the establishment, exercise or defence of legal claims "
           "or whenever courts are acting in their judicial capacity; (g) processing is necessary for reasons of "
           "substantial public interest; (h) processing is necessary for the purposes of preventive or occupational "
           "medicine, medical diagnosis, the provision of health or social care or treatment; (i) processing is "
           "necessary for reasons of public interest in the area of public health; (j) processing is necessary for "
           "archiving purposes in the public interest, scientific or historical research purposes or statistical "
           "purposes in accordance with Article 89(1).", "2",
      title="Processing of special categories of personal data"),
    p("10", "Processing of personal data relating to criminal convictions and offences or related security measures "
            "based on Article 6(1) shall be carried out only under the control of official authority or when the "
            "processing is authorised by Union or Member State law providing for appropriate safeguards for the "
            "rights and freedoms of data subjects. Any comprehensive register of criminal convictions shall be kept "
            "only under the control of official authority.",
      title="Processing of personal data relating to criminal convictions and offences"),
    p("11", "If the purposes for which a controller processes personal data do not or do no longer require the "
            "identification of a data subject by the controller, the controller shall not be obliged to maintain, "
            "acquire or process additional information in order to identify the data subject for the sole purpose "
            "of complying with this Regulation.", "1", title="Processing which does not require identification"),
    p("44", "Any transfer of personal data which are undergoing processing or are intended for processing after "
            "transfer to a third country or to an international organisation shall take place only if, subject to "
            "the other provisions of this Regulation, the conditions laid down in this Chapter are complied with by "
            "the controller and processor, including for onward transfers of personal data from the third country or "
            "an international organisation to another third country or to another international organisation. All "
            "provisions in this Chapter shall be applied in order to ensure that the level of protection of natural "
            "persons guaranteed by this Regulation is not undermined.", title="General principle for transfers"),
    p("86", "Personal data in official documents held by a public authority or a public body or a private body for "
            "the performance of a task carried out in the public interest may be disclosed by the authority or body "
            "in accordance with Union or Member State law to which the public authority or body is subject in order "
            "to reconcile public access to official documents with the right to the protection of personal data "
            "pursuant to this Regulation.", title="Processing and public access to official documents"),
    p("87", "Member States may further determine the specific conditions for the processing of a national "
            "identification number or any other identifier of general application. In that case the national "
            "identification number or any other identifier of general application shall be used only under "
            "appropriate safeguards for the rights and freedoms of the data subject pursuant to this Regulation.",
      title="Processing of the national identification number"),
    p("88", "Member States may, by law or by collective agreements, provide for more specific rules to ensure the "
            "protection of the rights and freedoms in respect of the processing of employees' personal data in the "
            "employment context, in particular for the purposes of the recruitment, the performance of the contract "
            "of employment, including discharge of obligations laid down by law or by collective agreements, "
            "management, planning and organisation of work, equality and diversity in the workplace, health and "
            "safety at work, protection of employer's or customer's property and for the purposes of the exercise "
            "and enjoyment, on an individual or collective basis, of rights and benefits related to employment, and "
            "for the purpose of the termination of the employment relationship.", "1",
      title="Processing in the context of employment"),
    p("89", "Processing for archiving purposes in the public interest, scientific or historical research purposes or "
            "statistical purposes, shall be subject to appropriate safeguards, in accordance with this Regulation, "
            "for the rights and freedoms of the data subject. Those safeguards shall ensure that technical and "
            "organisational measures are in place in particular in order to ensure respect for the principle of "
            "data minimisation. Those measures may include pseudonymisation provided that those purposes can be "
            "fulfilled in that manner. Where those purposes can be fulfilled by further processing which does not "
            "permit or no longer permits the identification of data subjects, those purposes shall be fulfilled in "
            "that manner.", "1",
      title="Safeguards and derogations relating to processing for archiving, research or statistical purposes"),
]

LAWFUL = "Processing shall be lawful only if and to the extent that at least one of the following applies: "
lawful = [
    p("6", LAWFUL + "the data subject has given consent to the processing of his or her personal data for one or more "
          "specific purposes.", "1", "a", "Lawfulness of processing"),
    p("6", LAWFUL + "processing is necessary for the performance of a contract to which the data subject is party or "
          "in order to take steps at the request of the data subject prior to entering into a contract.", "1", "b",
      "Lawfulness of processing"),
    p("6", LAWFUL + "processing is necessary for compliance with a legal obligation to which the controller is "
          "subject.", "1", "c", "Lawfulness of processing"),
    p("6", LAWFUL + "processing is necessary in order to protect the vital interests of the data subject or of "
          "another natural person.", "1", "d", "Lawfulness of processing"),
    p("6", LAWFUL + "processing is necessary for the performance of a task carried out in the public interest or in "
          "the exercise of official authority vested in the controller.", "1", "e", "Lawfulness of processing"),
    p("6", LAWFUL + "processing is necessary for the purposes of the legitimate interests pursued by the controller or "
          "by a third party, except where such interests are overridden by the interests or fundamental rights and "
          "freedoms of the data subject which require protection of personal data, in particular where the data "
          "subject is a child.", "1", "f", "Lawfulness of processing"),
]

obligations = [
    p("40", "The Member States, the supervisory authorities, the Board and the Commission shall encourage the drawing "
            "up of codes of conduct intended to contribute to the proper application of this Regulation, taking "
            "account of the specific features of the various processing sectors and the specific needs of micro, "
            "small and medium-sized enterprises.", "1", title="Codes of conduct"),
    p("42", "The Member States, the supervisory authorities, the Board and the Commission shall encourage, in "
            "particular at Union level, the establishment of data protection certification mechanisms and of data "
            "protection seals and marks, for the purpose of demonstrating compliance with this Regulation of "
            "processing operations by controllers and processors. The specific needs of micro, small and "
            "medium-sized enterprises shall be taken into account.", "1", title="Certification"),
]

rights = [
    p("13", "Where personal data relating to a data subject are collected from the data subject, the controller "
            "shall, at the time when personal data are obtained, provide the data subject with all of the following "
            "information: (a) the identity and the contact details of the controller and, where applicable, of the "
            "controller's representative; (b) the contact details of the data protection officer, where applicable; "
            "(c) the purposes of the processing for which the personal data are intended as well as the legal basis "
            "for the processing; (d) where the processing is based on point (f) of Article 6(1), the legitimate "
            "interests pursued by the controller or by a third party; (e) the recipients or categories of recipients "
            "of the personal data, if any; (f) where applicable, the fact that the controller intends to transfer "
            "personal data to a third country or international organisation.", "1",
      title="Information to be provided where personal data are collected from the data subject"),
    p("13", "In addition to the information referred to in paragraph 1, the controller shall, at the time when "
            "personal data are obtained, provide the data subject with the following further information necessary "
            "to ensure fair and transparent processing: (a) the period for which the personal data will be stored; "
            "(b) the existence of the right to request from the controller access to and rectification or erasure "
            "of personal data or restriction of processing or to object to processing as well as the right to data "
            "portability; (c) the existence of the right to withdraw consent at any time; (d) the right to lodge a "
            "complaint with a supervisory authority; (e) whether the provision of personal data is a statutory or "
            "contractual requirement; (f) the existence of automated decision-making, including profiling.", "2",
      title="Information to be provided where personal data are collected from the data subject"),
    p("14", "Where personal data have not been obtained from the data subject, the controller shall provide the data "
            "subject with the following information: (a) the identity and the contact details of the controller; "
            "(b) the contact details of the data protection officer, where applicable; (c) the purposes of the "
            "processing as well as the legal basis for the processing; (d) the categories of personal data "
            "concerned; (e) the recipients or categories of recipients of the personal data, if any; (f) where "
            "applicable, that the controller intends to transfer personal data to a recipient in a third country.",
      "1", title="Information to be provided where personal data have not been obtained from the data subject"),
    p("14", "In addition to the information referred to in paragraph 1, the controller shall provide the data subject "
            "with the following information necessary to ensure fair and transparent processing in respect of the "
            "data subject: (a) the period for which the personal data will be stored; (b) the legitimate interests "
            "pursued by the controller or by a third party where the processing is based on point (f) of Article "
            "6(1); (c) the existence of the rights of access, rectification, erasure, restriction, objection and "
            "data portability; (d) the right to withdraw consent at any time; (e) the right to lodge a complaint "
            "with a supervisory authority; (f) from which source the personal data originate; (g) the existence of "
            "automated decision-making, including profiling.", "2",
      title="Information to be provided where personal data have not been obtained from the data subject"),
    p("15", "The data subject shall have the right to obtain from the controller confirmation as to whether or not "
            "personal data concerning him or her are being processed, and, where that is the case, access to the "
            "personal data and information on the purposes of the processing, the categories of personal data "
            "concerned, the recipients, the envisaged storage period, the existence of the rights to rectification, "
            "erasure, restriction and objection, the right to lodge a complaint, the source of the data and the "
            "existence of automated decision-making.", "1", title="Right of access by the data subject"),
    p("16", "The data subject shall have the right to obtain from the controller without undue delay the "
            "rectification of inaccurate personal data concerning him or her. Taking into account the purposes of "
            "the processing, the data subject shall have the right to have incomplete personal data completed, "
            "including by means of providing a supplementary statement.", title="Right to rectification"),
    p("17", "The data subject shall have the right to obtain from the controller the erasure of personal data "
            "concerning him or her without undue delay and the controller shall have the obligation to erase "
            "personal data without undue delay where one of the following grounds applies: (a) the personal data "
            "are no longer necessary in relation to the purposes for which they were collected or otherwise "
            "processed; (b) the data subject withdraws consent and there is no other legal ground for the "
            "processing; (c) the data subject objects to the processing and there are no overriding legitimate "
            "grounds; (d) the personal data have been unlawfully processed; (e) the personal data have to be erased "
            "for compliance with a legal obligation; (f) the personal data have been collected in relation to the "
            "offer of information society services referred to in Article 8(1).", "1",
      title="Right to erasure ('right to be forgotten')"),
    p("18", "The data subject shall have the right to obtain from the controller restriction of processing where one "
            "of the following applies: (a) the accuracy of the personal data is contested by the data subject; (b) "
            "the processing is unlawful and the data subject opposes the erasure of the personal data; (c) the "
            "controller no longer needs the personal data for the purposes of the processing, but they are required "
            "by the data subject for the establishment, exercise or defence of legal claims; (d) the data subject "
            "has objected to processing pursuant to Article 21(1) pending the verification whether the legitimate "
            "grounds of the controller override those of the data subject.", "1",
      title="Right to restriction of processing"),
    p("20", "The data subject shall have the right to receive the personal data concerning him or her, which he or "
            "she has provided to a controller, in a structured, commonly used and machine-readable format and have "
            "the right to transmit those data to another controller without hindrance from the controller to which "
            "the personal data have been provided, where the processing is based on consent or on a contract and "
            "the processing is carried out by automated means.", "1", title="Right to data portability"),
    p("21", "The data subject shall have the right to object, on grounds relating to his or her particular situation, "
            "at any time to processing of personal data concerning him or her which is based on point (e) or (f) of "
            "Article 6(1), including profiling based on those provisions. The controller shall no longer process the "
            "personal data unless the controller demonstrates compelling legitimate grounds for the processing which "
            "override the interests, rights and freedoms of the data subject or for the establishment, exercise or "
            "defence of legal claims.", "1", title="Right to object"),
    p("22", "The data subject shall have the right not to be subject to a decision based solely on automated "
            "processing, including profiling, which produces legal effects concerning him or her or similarly "
            "significantly affects him or her.", "1",
      title="Automated individual decision-making, including profiling"),
]

PD = "Personal data shall be "
principles = [
    p("5", PD + "processed lawfully, fairly and in a transparent manner in relation to the data subject "
          "('lawfulness, fairness and transparency').", "1", "a", "Principles relating to processing of personal data"),
    p("5", PD + "collected for specified, explicit and legitimate purposes and not further processed in a manner that "
          "is incompatible with those purposes; further processing for archiving purposes in the public interest, "
          "scientific or historical research purposes or statistical purposes shall, in accordance with Article "
          "89(1), not be considered to be incompatible with the initial purposes ('purpose limitation').", "1", "b",
      "Principles relating to processing of personal data"),
    p("5", PD + "adequate, relevant and limited to what is necessary in relation to the purposes for which they are "
          "processed ('data minimisation').", "1", "c", "Principles relating to processing of personal data"),
    p("5", PD + "accurate and, where necessary, kept up to date; every reasonable step must be taken to ensure that "
          "personal data that are inaccurate, having regard to the purposes for which they are processed, are erased "
          "or rectified without delay ('accuracy').", "1", "d", "Principles relating to processing of personal data"),
    p("5", PD + "kept in a form which permits identification of data subjects for no longer than is necessary for the "
          "purposes for which the personal data are processed; personal data may be stored for longer periods "
          "insofar as the personal data will be processed solely for archiving purposes in the public interest, "
          "scientific or historical research purposes or statistical purposes in accordance with Article 89(1) "
          "subject to implementation of the appropriate technical and organisational measures required by this "
          "Regulation in order to safeguard the rights and freedoms of the data subject ('storage limitation').",
      "1", "e", "Principles relating to processing of personal data"),
    p("5", PD + "processed in a manner that ensures appropriate security of the personal data, including protection "
          "against unauthorised or unlawful processing and against accidental loss, destruction or damage, using "
          "appropriate technical or organisational measures ('integrity and confidentiality').", "1", "f",
      "Principles relating to processing of personal data"),
    p("5", "The controller shall be responsible for, and be able to demonstrate compliance with, paragraph 1 "
           "('accountability').", "2", title="Principles relating to processing of personal data"),
]

manifest = {
    "name": "GDPR",
    "version": "2016/679-chunked-1",
    "provenance": (
        "Chunk membership: scope = Art. 2-3; special conditions = Art. 8, 9, 10, 11, 44, 86, 87, 88, 89; "
        "common provisions = Art. 6 (lawful_basis), Art. 40, 42 (obligations), Art. 13-18, 20-22 "
        "(subject_rights); general principles = Art. 5. Art. 2(2)(a)-(d) are marked as scope exemptions following "
        "the wording of Art. 2(2); this classification needs legal review. Long articles are kept at item level "
        "with their points inlined; Art. 15(1) points are condensed. Sub-item texts carry the chapeau of their item."
    ),
    "chunks": [
        {"kind": "applicability_scope", "connective": "disjunctive", "provisions": scope},
        {"kind": "special_conditions", "connective": "conjunctive", "provisions": specials},
        {"kind": "common_provisions", "connective": "disjunctive", "sub_group": "lawful_basis", "provisions": lawful},
        {"kind": "common_provisions", "connective": "conjunctive", "sub_group": "obligations",
         "provisions": obligations},
        {"kind": "common_provisions", "connective": "conjunctive", "sub_group": "subject_rights",
         "provisions": rights},
        {"kind": "general_principles", "connective": "conjunctive", "provisions": principles},
    ],
}

with open("gdpr_manifest.json", "w") as f:
    json.dump(manifest, f, indent=2, ensure_ascii=False)
    f.write("\n")
